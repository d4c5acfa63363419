#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cohassist/coherence.hpp"
#include "cohassist/protocol.hpp"
#include "cohassist/saturation.hpp"

namespace py = pybind11;
using namespace cohassist;

namespace {

using CArray = py::array_t<cplx, py::array::c_style | py::array::forcecast>;

ComplexMatrix to_matrix(const CArray& a) {
    if (a.ndim() != 2) throw Error(ErrorKind::ShapeMismatch, "expected a 2-d array");
    const auto r = static_cast<std::size_t>(a.shape(0));
    const auto c = static_cast<std::size_t>(a.shape(1));
    return ComplexMatrix(r, c, std::vector<cplx>(a.data(), a.data() + r * c));
}

CArray from_matrix(const ComplexMatrix& m) {
    CArray out({m.rows(), m.cols()});
    std::copy(m.data().begin(), m.data().end(), out.mutable_data());
    return out;
}

CArray from_vector(const ComplexVector& v) {
    CArray out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

DensityMatrix density(const CArray& a, double tol) { return validate_density(to_matrix(a), tol); }

py::list ensemble_list(const PureEnsemble& ens) {
    py::list out;
    for (const auto& m : ens.members()) out.append(py::make_tuple(m.weight, from_vector(m.state.amplitudes())));
    return out;
}

PureEnsemble ensemble_from(const std::vector<std::pair<double, ComplexVector>>& members, double tol) {
    std::vector<EnsembleMember> out;
    for (const auto& [w, amps] : members) out.push_back({w, PureState::from_amplitudes(amps, tol)});
    return PureEnsemble::make(std::move(out), tol);
}

py::dict certificate_dict(const SaturationCertificate& c) {
    py::dict d;
    d["verdict"] = std::string(to_string(c.verdict));
    d["method"] = std::string(to_string(c.method));
    d["residual_mix"] = c.residual_mix;
    d["residual_diag"] = c.residual_diag;
    d["coherence_gap"] = c.coherence_gap;
    d["ensemble_size"] = c.ensemble_size;
    d["witness"] = c.witness ? py::object(ensemble_list(*c.witness)) : py::none();
    d["lower_bound"] = c.lower_bound ? py::object(py::float_(*c.lower_bound)) : py::none();
    d["notes"] = c.notes;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Coherence measures, coherence of assistance and saturation certificates";

    py::register_exception<Error>(m, "CohAssistError", PyExc_ValueError);

    m.def("validate", [](const CArray& rho, double tol) {
        const auto d = density(rho, tol);
        return py::make_tuple(d.spectrum().eigenvalues, d.rank());
    }, py::arg("rho"), py::arg("tol") = kDefaultTol, "Validate a density matrix; returns (eigenvalues, rank).");

    m.def("eigh", [](const CArray& h) {
        const auto sd = eig_hermitian(to_matrix(h));
        const std::size_t n = sd.eigenvalues.size();
        ComplexMatrix vecs(n, n);
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < n; ++i) vecs(i, k) = sd.eigenvectors[k][i];
        return py::make_tuple(sd.eigenvalues, from_matrix(vecs));
    }, py::arg("h"), "Eigenvalues (descending) and eigenvectors as columns.");

    m.def("entropy", [](const std::vector<double>& p, double base) { return entropy(p, base); }, py::arg("p"),
          py::arg("log_base") = 2.0);

    m.def("measures", [](const CArray& rho, double log_base, double tol) {
        const auto r = coherence_report(density(rho, tol), log_base);
        py::dict d;
        d["relative_entropy"] = r.c_r;
        d["l1"] = r.c_l1;
        d["regularized_assistance"] = r.c_a_infinity;
        return d;
    }, py::arg("rho"), py::arg("log_base") = 2.0, py::arg("tol") = kDefaultTol);

    m.def("maximize_assistance", [](const CArray& rho, std::size_t ensemble_size, int restarts, int max_iters,
                                    std::uint64_t seed, double tol) {
        OptimizerConfig cfg;
        cfg.ensemble_size = ensemble_size;
        cfg.restarts = restarts;
        cfg.max_iters = max_iters;
        cfg.seed = seed;
        cfg.tol = tol;
        const auto r = maximize_assistance(density(rho, tol), cfg);
        py::dict d;
        d["value"] = r.value;
        d["ceiling"] = r.ceiling;
        d["gap"] = r.gap;
        d["witness"] = ensemble_list(r.witness);
        return d;
    }, py::arg("rho"), py::arg("ensemble_size") = 0, py::arg("restarts") = 20, py::arg("max_iters") = 200,
       py::arg("seed") = 0, py::arg("tol") = kDefaultTol);

    m.def("qubit_decomposition", [](const CArray& rho, double tol) { return ensemble_list(qubit_decomposition(density(rho, tol))); },
          py::arg("rho"), py::arg("tol") = kDefaultTol);
    m.def("qutrit_decomposition", [](const CArray& rho, double tol) { return ensemble_list(qutrit_decomposition(density(rho, tol))); },
          py::arg("rho"), py::arg("tol") = kDefaultTol);
    m.def("ndim_decomposition", [](const CArray& rho, double tol) {
        const auto r = ndim_decomposition(density(rho, tol));
        py::dict d;
        d["feasible"] = r.feasible;
        d["p"] = r.p;
        d["residual"] = r.residual;
        d["ensemble"] = r.ensemble ? py::object(ensemble_list(*r.ensemble)) : py::none();
        d["reason"] = r.reason;
        return d;
    }, py::arg("rho"), py::arg("tol") = kDefaultTol);

    m.def("saturate", [](const CArray& rho, int budget, std::size_t max_ensemble_size, std::uint64_t seed, double tol) {
        PipelineConfig cfg;
        cfg.tol = tol;
        cfg.budget = budget;
        cfg.max_ensemble_size = max_ensemble_size;
        cfg.seed = seed;
        return certificate_dict(saturation_pipeline(density(rho, tol), cfg));
    }, py::arg("rho"), py::arg("budget") = 200, py::arg("max_ensemble_size") = 0, py::arg("seed") = 0,
       py::arg("tol") = kDefaultTol);

    m.def("purify", [](const CArray& rho, double tol) {
        const auto psi = purify(density(rho, tol));
        return py::make_tuple(psi.dim_a(), psi.dim_b(), from_vector(psi.amplitudes()));
    }, py::arg("rho"), py::arg("tol") = kDefaultTol, "Purification as (dim_a, dim_b, amplitudes), A-major.");

    m.def("run_protocol", [](const CArray& rho, std::optional<std::vector<std::pair<double, ComplexVector>>> ensemble,
                             std::optional<std::size_t> shots, std::uint64_t seed, double tol) {
        const auto d = density(rho, tol);
        Strategy strategy = AutoSaturate{};
        if (ensemble) strategy = UserEnsemble{ensemble_from(*ensemble, tol)};
        Mode mode = Enumerate{};
        if (shots) mode = Sample{seed, *shots};
        const auto tr = run_protocol(d, strategy, mode, ProtocolOptions{.tol = tol});
        py::dict out;
        py::list outcomes;
        for (const auto& o : tr.outcomes)
            outcomes.append(py::make_tuple(o.index, o.probability, from_vector(o.state.amplitudes()), o.coherence));
        out["outcomes"] = outcomes;
        out["decomposition"] = ensemble_list(tr.decomposition);
        out["average_coherence"] = tr.average_coherence;
        out["ceiling"] = tr.ceiling;
        out["fallback_used"] = tr.fallback_used;
        if (tr.sample_stats) {
            out["counts"] = tr.sample_stats->counts;
            out["empirical_average"] = tr.sample_stats->empirical_average;
            out["standard_error"] = tr.sample_stats->standard_error;
        }
        return out;
    }, py::arg("rho"), py::arg("ensemble") = py::none(), py::arg("shots") = py::none(), py::arg("seed") = 0,
       py::arg("tol") = kDefaultTol);
}
