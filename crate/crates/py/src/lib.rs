//! Python bindings. Exact values cross the boundary as `"num/den"` strings.

use freetensor::distribution::{free_sum, render_value};
use freetensor::ensembles::{estimate_moments as estimate, EnsembleConfig, EntryLaw, RankCoupling};
use freetensor::map::{self, build_map, Atlas, CanonicalCode};
use freetensor::rational::{fmt_q, parse_q, Q};
use freetensor::series::{self as ser, CumulantSeries, Law, MomentSeries, Poly, Ring};
use freetensor::tensor::eval_trace_invariant;
use freetensor::{Error, Permutation};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(m) => PyIOError::new_err(m),
        other => PyValueError::new_err(other.to_string()),
    }
}

trait OrRaise<T> {
    fn or_raise(self) -> PyResult<T>;
}

impl<T> OrRaise<T> for freetensor::Result<T> {
    fn or_raise(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn rationals(xs: &[String]) -> PyResult<Vec<Q>> {
    xs.iter().map(|s| parse_q(s)).collect::<freetensor::Result<_>>().or_raise()
}

fn render(xs: &[Q]) -> Vec<String> {
    xs.iter().map(fmt_q).collect()
}

/// Combinatorial map given by 1-based vertex cycles and 1-based pairs.
#[pyclass(name = "CombMap", frozen)]
struct PyCombMap(freetensor::CombMap);

#[pymethods]
impl PyCombMap {
    #[new]
    fn new(cycles: Vec<Vec<usize>>, pairs: Vec<(usize, usize)>) -> PyResult<Self> {
        Ok(PyCombMap(build_map(&cycles, &pairs).or_raise()?))
    }

    #[staticmethod]
    fn from_code(code: &str) -> PyResult<Self> {
        Ok(PyCombMap(CanonicalCode::from_hex(code).and_then(|c| c.to_map()).or_raise()?))
    }

    #[staticmethod]
    fn melon(p: usize) -> PyResult<Self> {
        Ok(PyCombMap(map::melon(p, &Permutation::identity(p)).or_raise()?))
    }

    #[staticmethod]
    fn bouquet(p: usize) -> PyResult<Self> {
        Ok(PyCombMap(map::bouquet(p, &Permutation::identity(p)).or_raise()?))
    }

    #[staticmethod]
    fn multicycle(p: usize, n: usize) -> PyResult<Self> {
        Ok(PyCombMap(map::multicycle_id(p, n).or_raise()?))
    }

    fn cycles(&self) -> Vec<Vec<usize>> {
        self.0.cycles_one_based()
    }

    fn pairs(&self) -> Vec<(usize, usize)> {
        self.0.pairs_one_based()
    }

    fn vertex_count(&self) -> usize {
        self.0.vertex_count()
    }

    fn edge_count(&self) -> usize {
        self.0.edge_count()
    }

    fn gamma(&self) -> usize {
        self.0.gamma()
    }

    fn is_connected(&self) -> bool {
        self.0.is_connected()
    }

    /// Hex canonical code; rooted at vertex 1.
    fn code(&self) -> String {
        self.0.canonical_code().to_hex()
    }

    /// Hex code invariant under every relabeling.
    fn free_code(&self) -> String {
        self.0.free_code().to_hex()
    }

    fn components(&self) -> Vec<PyCombMap> {
        self.0.components().into_iter().map(PyCombMap).collect()
    }

    fn switches(&self) -> Vec<PyCombMap> {
        self.0.all_switches().into_iter().map(PyCombMap).collect()
    }

    fn __repr__(&self) -> String {
        format!("CombMap(cycles={:?}, pairs={:?})", self.0.cycles_one_based(), self.0.pairs_one_based())
    }

    fn __eq__(&self, other: PyRef<'_, PyCombMap>) -> bool {
        self.0.canonical_code() == other.0.canonical_code()
    }

    fn __hash__(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.0.canonical_code().hash(&mut h);
        h.finish()
    }
}

/// Classes of B_n for order `p`, cached under `cache_dir` when given.
#[pyfunction]
#[pyo3(signature = (p, n, cache_dir=None))]
fn enumerate(p: usize, n: usize, cache_dir: Option<String>) -> PyResult<Vec<PyCombMap>> {
    let atlas = cache_dir.map(Atlas::with_dir).unwrap_or_else(Atlas::in_memory);
    Ok(atlas.get(p, n).or_raise()?.into_iter().map(PyCombMap).collect())
}

#[pyfunction]
fn down_set(m: PyRef<'_, PyCombMap>) -> PyResult<Vec<PyCombMap>> {
    Ok(freetensor::poset::down_set(&m.0).or_raise()?.into_iter().map(PyCombMap).collect())
}

#[pyfunction]
fn moebius(lower: PyRef<'_, PyCombMap>, upper: PyRef<'_, PyCombMap>) -> PyResult<i64> {
    freetensor::poset::moebius(&lower.0, &upper.0).or_raise()
}

#[pyfunction]
fn is_melonic(m: PyRef<'_, PyCombMap>) -> PyResult<bool> {
    freetensor::poset::is_melonic(&m.0).or_raise()
}

/// Distribution on maps. Values are polynomials in `t`, rendered as strings.
#[pyclass(name = "MapDistribution", frozen)]
struct PyDistribution(freetensor::MapDistribution);

fn rate(t: Option<&str>) -> PyResult<Poly> {
    Ok(match t {
        Some(s) => Poly::constant(parse_q(s).or_raise()?),
        None => Poly::var(),
    })
}

#[pymethods]
impl PyDistribution {
    #[staticmethod]
    fn melonic(p: usize) -> PyResult<Self> {
        Ok(PyDistribution(freetensor::MapDistribution::melonic(p).or_raise()?))
    }

    /// Free Poisson rule; symbolic in `t` when no rate is given.
    #[staticmethod]
    #[pyo3(signature = (p, t=None))]
    fn free_poisson(p: usize, t: Option<&str>) -> PyResult<Self> {
        Ok(PyDistribution(freetensor::MapDistribution::free_poisson(p, rate(t)?).or_raise()?))
    }

    #[staticmethod]
    #[pyo3(signature = (p, t=None))]
    fn identity(p: usize, t: Option<&str>) -> PyResult<Self> {
        Ok(PyDistribution(freetensor::MapDistribution::identity(p, rate(t)?).or_raise()?))
    }

    #[staticmethod]
    fn delta_zero(p: usize) -> PyResult<Self> {
        Ok(PyDistribution(freetensor::MapDistribution::delta_zero(p).or_raise()?))
    }

    fn order(&self) -> usize {
        self.0.order()
    }

    fn eval(&self, m: PyRef<'_, PyCombMap>) -> PyResult<String> {
        Ok(render_value(&self.0.eval(&m.0).or_raise()?))
    }

    fn cumulant(&self, m: PyRef<'_, PyCombMap>) -> PyResult<String> {
        Ok(render_value(&self.0.cumulant_by_moebius(&m.0).or_raise()?))
    }

    fn moment_n(&self, n: usize) -> PyResult<String> {
        Ok(render_value(&self.0.moment_n(n).or_raise()?))
    }

    fn cumulant_n(&self, n: usize) -> PyResult<String> {
        Ok(render_value(&self.0.cumulant_n(n).or_raise()?))
    }

    fn __add__(&self, other: PyRef<'_, PyDistribution>) -> PyResult<Self> {
        Ok(PyDistribution(free_sum(&self.0, &other.0).or_raise()?))
    }
}

fn make_law(family: &str, p: usize, t: &str, tau: &str, dilation: Option<&str>) -> PyResult<Law> {
    let t = parse_q(t).or_raise()?;
    Ok(match family {
        "semicircular" => Law::Semicircular { p },
        "free_poisson" | "free-poisson" => Law::FreePoisson { p, t },
        "marchenko_pastur" | "marchenko-pastur" => {
            let dilation = dilation.map(parse_q).transpose().or_raise()?;
            Law::MarchenkoPastur { p, tau: parse_q(tau).or_raise()?, dilation }
        }
        "delta" => Law::Delta { p, t },
        other => return Err(PyValueError::new_err(format!("unknown family {other:?}"))),
    })
}

/// Moments `m_0..m_K` of a named law.
#[pyfunction]
#[pyo3(signature = (family, p, k, t="1", tau="1", dilation=None))]
fn law_moments(family: &str, p: usize, k: usize, t: &str, tau: &str, dilation: Option<&str>) -> PyResult<Vec<String>> {
    let law = make_law(family, p, t, tau, dilation)?;
    Ok(render(ser::law_moments(&law, k).or_raise()?.coeffs()))
}

#[pyfunction]
#[pyo3(signature = (family, p, k, t="1", tau="1", dilation=None))]
fn law_cumulants(family: &str, p: usize, k: usize, t: &str, tau: &str, dilation: Option<&str>) -> PyResult<Vec<String>> {
    let law = make_law(family, p, t, tau, dilation)?;
    Ok(render(ser::law_cumulants(&law, k).or_raise()?.coeffs()))
}

fn moment_series(p: usize, m: &[String]) -> PyResult<MomentSeries<Q>> {
    MomentSeries::new(p, rationals(m)?).or_raise()
}

#[pyfunction]
fn cumulants_from_moments(p: usize, moments: Vec<String>) -> PyResult<Vec<String>> {
    Ok(render(ser::cumulants_from_moments(&moment_series(p, &moments)?).or_raise()?.coeffs()))
}

#[pyfunction]
fn moments_from_cumulants(p: usize, cumulants: Vec<String>) -> PyResult<Vec<String>> {
    let c = CumulantSeries::new(p, rationals(&cumulants)?).or_raise()?;
    Ok(render(ser::moments_from_cumulants(&c).or_raise()?.coeffs()))
}

#[pyfunction]
fn free_convolve(p: usize, a: Vec<String>, b: Vec<String>) -> PyResult<Vec<String>> {
    Ok(render(ser::free_convolve(&moment_series(p, &a)?, &moment_series(p, &b)?).or_raise()?.coeffs()))
}

#[pyfunction]
fn r_transform(p: usize, moments: Vec<String>) -> PyResult<Vec<String>> {
    let c = ser::cumulants_from_moments(&moment_series(p, &moments)?).or_raise()?;
    Ok(render(ser::r_transform(&c).coeffs()))
}

#[pyfunction]
fn q_transform(p: usize, moments: Vec<String>) -> PyResult<Vec<String>> {
    let c = ser::cumulants_from_moments(&moment_series(p, &moments)?).or_raise()?;
    Ok(render(ser::q_transform(&c).or_raise()?.coeffs()))
}

/// `(K(G(z)) = z, G(K(z)) = z)` up to `trunc`.
#[pyfunction]
fn cauchy_check(p: usize, moments: Vec<String>, trunc: usize) -> PyResult<(bool, bool)> {
    let c = ser::cauchy_pair_check(&moment_series(p, &moments)?, trunc).or_raise()?;
    Ok((c.kg, c.gk))
}

/// Cumulants of the normalized k-fold free sum, exact with square roots.
#[pyfunction]
fn clt_rescale(p: usize, cumulants: Vec<String>, k: u64) -> PyResult<Vec<String>> {
    let c = CumulantSeries::new(p, rationals(&cumulants)?).or_raise()?;
    Ok(ser::clt_rescale(&c, k).or_raise()?.coeffs().iter().map(Ring::render).collect())
}

/// Dense order-`p` tensor on `R^N`, row-major.
#[pyclass(name = "DenseTensor", frozen)]
struct PyTensor(freetensor::DenseTensor);

#[pymethods]
impl PyTensor {
    #[new]
    fn new(p: usize, n: usize, data: Vec<f64>) -> PyResult<Self> {
        Ok(PyTensor(freetensor::DenseTensor::new(p, n, data).or_raise()?))
    }

    fn order(&self) -> usize {
        self.0.order()
    }

    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn data(&self) -> Vec<f64> {
        self.0.data().to_vec()
    }

    fn get(&self, idx: Vec<usize>) -> PyResult<f64> {
        if idx.len() != self.0.order() || idx.iter().any(|&i| i >= self.0.dim()) {
            return Err(PyValueError::new_err("index out of range"));
        }
        Ok(self.0.get(&idx))
    }

    fn symmetrize(&self) -> Self {
        PyTensor(self.0.symmetrize())
    }

    fn is_symmetric(&self) -> bool {
        self.0.is_symmetric()
    }

    /// `b(T, …, T)`
    fn trace_invariant(&self, m: PyRef<'_, PyCombMap>) -> PyResult<f64> {
        let ts = vec![&self.0; m.0.vertex_count()];
        eval_trace_invariant(&m.0, &ts).or_raise()
    }
}

#[pyfunction]
fn trace_invariant(m: PyRef<'_, PyCombMap>, tensors: Vec<PyRef<'_, PyTensor>>) -> PyResult<f64> {
    let ts: Vec<&freetensor::DenseTensor> = tensors.iter().map(|t| &t.0).collect();
    eval_trace_invariant(&m.0, &ts).or_raise()
}

fn ensemble(family: &str, p: usize, n: usize, seed: u64, entries: &str, t: f64, linear_rank: bool) -> PyResult<EnsembleConfig> {
    let mut cfg = match family {
        "wigner" => EnsembleConfig::wigner(p, n, seed),
        "wishart" => EnsembleConfig::wishart(p, n, t, seed),
        other => return Err(PyValueError::new_err(format!("unknown ensemble {other:?}"))),
    };
    cfg.entries = match entries {
        "gaussian" => EntryLaw::Gaussian,
        "rademacher" => EntryLaw::Rademacher,
        other => return Err(PyValueError::new_err(format!("unknown entry law {other:?}"))),
    };
    if linear_rank {
        cfg.coupling = RankCoupling::Linear;
        cfg.variance = Some(1.0);
    }
    cfg.validate().or_raise()?;
    Ok(cfg)
}

/// One draw from a Wigner or Wishart ensemble; `trial` selects the stream.
#[pyfunction]
#[pyo3(signature = (family, p, n, seed, trial=0, entries="gaussian", t=1.0, linear_rank=false))]
#[allow(clippy::too_many_arguments)]
fn sample(family: &str, p: usize, n: usize, seed: u64, trial: u64, entries: &str, t: f64, linear_rank: bool) -> PyResult<PyTensor> {
    let cfg = ensemble(family, p, n, seed, entries, t, linear_rank)?;
    Ok(PyTensor(cfg.sample(&mut cfg.rng(trial)).or_raise()?))
}

/// Monte Carlo moments `m_1..m_{n_max}` as `(n, mean, stderr)`.
#[pyfunction]
#[pyo3(signature = (family, p, n, n_max, trials, seed, entries="gaussian", t=1.0, linear_rank=false))]
#[allow(clippy::too_many_arguments)]
fn estimate_moments(family: &str, p: usize, n: usize, n_max: usize, trials: usize, seed: u64, entries: &str, t: f64, linear_rank: bool) -> PyResult<Vec<(usize, f64, f64)>> {
    let cfg = ensemble(family, p, n, seed, entries, t, linear_rank)?;
    let r = estimate(&cfg, n_max, trials, &Atlas::in_memory()).or_raise()?;
    Ok(r.stats.iter().filter_map(|s| s.n.map(|k| (k, s.mean, s.stderr))).collect())
}

#[pymodule]
fn pyfreetensor(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCombMap>()?;
    m.add_class::<PyDistribution>()?;
    m.add_class::<PyTensor>()?;
    m.add_function(wrap_pyfunction!(enumerate, m)?)?;
    m.add_function(wrap_pyfunction!(down_set, m)?)?;
    m.add_function(wrap_pyfunction!(moebius, m)?)?;
    m.add_function(wrap_pyfunction!(is_melonic, m)?)?;
    m.add_function(wrap_pyfunction!(law_moments, m)?)?;
    m.add_function(wrap_pyfunction!(law_cumulants, m)?)?;
    m.add_function(wrap_pyfunction!(cumulants_from_moments, m)?)?;
    m.add_function(wrap_pyfunction!(moments_from_cumulants, m)?)?;
    m.add_function(wrap_pyfunction!(free_convolve, m)?)?;
    m.add_function(wrap_pyfunction!(r_transform, m)?)?;
    m.add_function(wrap_pyfunction!(q_transform, m)?)?;
    m.add_function(wrap_pyfunction!(cauchy_check, m)?)?;
    m.add_function(wrap_pyfunction!(clt_rescale, m)?)?;
    m.add_function(wrap_pyfunction!(trace_invariant, m)?)?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_moments, m)?)?;
    Ok(())
}
