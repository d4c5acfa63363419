#include "cohassist/cli/commands.hpp"

#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "cohassist/cli/report.hpp"
#include "cohassist/cli/statefile.hpp"
#include "cohassist/coherence.hpp"
#include "cohassist/protocol.hpp"
#include "cohassist/saturation.hpp"

namespace cohassist::cli {

using nlohmann::json;

namespace {

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::ParseError:
        case ErrorKind::ShapeMismatch:
        case ErrorKind::NotFinite:
        case ErrorKind::NotHermitian:
        case ErrorKind::TraceNotOne:
        case ErrorKind::NotPositive:
        case ErrorKind::ZeroDiagonalInconsistency:
        case ErrorKind::NotNormalized:
        case ErrorKind::InvalidEnsemble:
        case ErrorKind::NotIsometry:
        case ErrorKind::BasisNotOrthonormal:
        case ErrorKind::ConfigInvalid:
        case ErrorKind::NotApplicable:
        case ErrorKind::OutsidePolytope:
        case ErrorKind::ConstraintViolation:
            return kExitInvalidInput;
        case ErrorKind::NoDecompositionFound:
            return kExitSearchExhausted;
        case ErrorKind::NoConvergence:
        case ErrorKind::InternalInconsistency:
            return kExitInternal;
    }
    return kExitInternal;
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

json certificate_to_json(const SaturationCertificate& c) {
    json out = {{"verdict", std::string(to_string(c.verdict))},
                {"method", std::string(to_string(c.method))},
                {"residual_mix", c.residual_mix},
                {"residual_diag", c.residual_diag},
                {"coherence_gap", c.coherence_gap},
                {"ensemble_size", c.ensemble_size},
                {"notes", c.notes}};
    if (c.witness) out["witness"] = ensemble_to_json(*c.witness);
    if (c.phases) {
        json cols = json::array();
        for (std::size_t k = 0; k < c.phases->columns(); ++k) cols.push_back(c.phases->column(k));
        out["phases"] = {{"dim", c.phases->dim()}, {"columns", std::move(cols)}};
    }
    if (c.lower_bound) out["lower_bound"] = *c.lower_bound;
    return out;
}

std::string ensemble_human(const PureEnsemble& ens) {
    std::ostringstream os;
    for (std::size_t k = 0; k < ens.size(); ++k) {
        os << "  [" << k << "] p = " << fmt(ens[k].weight) << "  psi = (";
        const auto& a = ens[k].state.amplitudes();
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (i) os << ", ";
            os << fmt(a[i].real());
            if (a[i].imag() != 0.0) os << (a[i].imag() < 0 ? " - " : " + ") << fmt(std::abs(a[i].imag())) << "i";
        }
        os << ")\n";
    }
    return os.str();
}

struct Loaded {
    StateFile file;
    std::optional<DensityMatrix> rho;
};

// Shared envelope: reads the state, fills the common report fields, runs the body and maps
// library errors to exit codes.
CommandResult run_command(const std::string& name, const CommonOptions& common,
                          const std::function<void(const DensityMatrix&, CommandResult&)>& body,
                          bool validate_only = false) {
    CommandResult res;
    json& rep = res.report;
    rep["tool"] = "cohassist";
    rep["version"] = COHASSIST_VERSION;
    rep["command"] = {{"name", name}, {"argv", common.argv}};
    rep["seed"] = common.seed;
    rep["tolerance"] = common.tol;
    rep["log_base"] = common.log_base;
    rep["warnings"] = json::array();
    rep["results"] = json::object();
    rep["input"] = {{"path", common.path}};
    std::ostringstream human;

    try {
        const std::string bytes = read_file(common.path);
        rep["input"]["sha256"] = sha256_hex(bytes);
        const StateFile file = parse_state_file(bytes);
        rep["input"]["dim"] = file.dim;
        if (!file.label.empty()) rep["input"]["label"] = file.label;
        const DensityMatrix rho = validate_density(file.matrix, common.tol);
        if (validate_only) {
            rep["results"]["valid"] = true;
        }
        body(rho, res);
        rep["error"] = nullptr;
    } catch (const Error& e) {
        res.exit_code = exit_code_for(e.kind());
        rep["error"] = {{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}};
        if (validate_only && res.exit_code == kExitInvalidInput) rep["results"]["valid"] = false;
        res.human = std::string(e.what()) + "\n";
    } catch (const std::exception& e) {
        res.exit_code = kExitInternal;
        rep["error"] = {{"kind", "InternalInconsistency"}, {"message", e.what()}};
        res.human = std::string("InternalInconsistency: ") + e.what() + "\n";
    }
    rep["exit_code"] = res.exit_code;
    return res;
}

}  // namespace

CommandResult cmd_validate(const CommonOptions& common) {
    return run_command(
        "validate", common,
        [&](const DensityMatrix& rho, CommandResult& res) {
            const auto& ev = rho.spectrum().eigenvalues;
            res.report["results"]["eigenvalues"] = ev;
            res.report["results"]["trace"] = rho.matrix().trace().real();
            res.report["results"]["rank"] = rho.rank();
            std::ostringstream os;
            os << "valid density matrix, dim " << rho.dim() << ", rank " << rho.rank() << "\neigenvalues:";
            for (double l : ev) os << " " << fmt(l);
            os << "\n";
            res.human = os.str();
        },
        true);
}

CommandResult cmd_measures(const CommonOptions& common) {
    return run_command("measures", common, [&](const DensityMatrix& rho, CommandResult& res) {
        const CoherenceReport cr = coherence_report(rho, common.log_base);
        json& r = res.report["results"];
        r["relative_entropy_coherence"] = cr.c_r;
        r["l1_coherence"] = cr.c_l1;
        r["regularized_assistance"] = cr.c_a_infinity;
        r["dephased"] = dephase(rho).probs;
        r["von_neumann_entropy"] = von_neumann_entropy(rho, common.log_base);
        std::ostringstream os;
        os << "C_r        = " << fmt(cr.c_r) << "\n"
           << "C_l1       = " << fmt(cr.c_l1) << "\n"
           << "C_a^inf    = " << fmt(cr.c_a_infinity) << "  (S(Delta(rho)), log base " << common.log_base << ")\n";
        res.human = os.str();
    });
}

CommandResult cmd_assist(const CommonOptions& common, const AssistOptions& opts) {
    return run_command("assist", common, [&](const DensityMatrix& rho, CommandResult& res) {
        OptimizerConfig cfg;
        cfg.ensemble_size = opts.ensemble_size;
        cfg.restarts = opts.restarts;
        cfg.max_iters = opts.max_iters;
        cfg.seed = common.seed;
        cfg.log_base = common.log_base;
        cfg.tol = common.tol;
        const AssistanceResult ar = maximize_assistance(rho, cfg);
        json& r = res.report["results"];
        r["lower_bound"] = ar.value;
        r["regularized_assistance"] = ar.ceiling;
        r["gap"] = ar.gap;
        r["ensemble_size"] = ar.ensemble_size;
        r["restarts"] = opts.restarts;
        r["max_iters"] = opts.max_iters;
        r["best_restart"] = ar.best_restart;
        r["witness"] = ensemble_to_json(ar.witness);
        std::ostringstream os;
        os << "C_a lower bound = " << fmt(ar.value) << "\n"
           << "C_a^inf         = " << fmt(ar.ceiling) << "\n"
           << "gap             = " << fmt(ar.gap) << "\n"
           << "witness (" << ar.witness.size() << " members):\n"
           << ensemble_human(ar.witness);
        res.human = os.str();
    });
}

CommandResult cmd_saturate(const CommonOptions& common, const SaturateOptions& opts) {
    return run_command("saturate", common, [&](const DensityMatrix& rho, CommandResult& res) {
        PipelineConfig cfg;
        cfg.tol = common.tol;
        cfg.budget = opts.budget;
        cfg.max_ensemble_size = opts.max_ensemble_size;
        cfg.seed = common.seed;
        cfg.optimizer.log_base = common.log_base;
        const SaturationCertificate cert = saturation_pipeline(rho, cfg);
        res.report["results"]["certificate"] = certificate_to_json(cert);
        res.report["results"]["regularized_assistance"] = regularized_assistance(rho, common.log_base);
        for (const auto& n : cert.notes) res.report["warnings"].push_back(n);
        res.exit_code = cert.verdict == Verdict::Saturated ? kExitOk : kExitSearchExhausted;
        std::ostringstream os;
        os << "verdict  = " << to_string(cert.verdict) << "\n"
           << "method   = " << to_string(cert.method) << "\n";
        if (cert.witness) {
            os << "residual_mix  = " << fmt(cert.residual_mix) << "\n"
               << "residual_diag = " << fmt(cert.residual_diag) << "\n"
               << "witness (" << cert.witness->size() << " members):\n"
               << ensemble_human(*cert.witness);
        }
        if (cert.lower_bound) os << "optimizer lower bound = " << fmt(*cert.lower_bound) << "\n";
        for (const auto& n : cert.notes) os << "note: " << n << "\n";
        res.human = os.str();
    });
}

CommandResult cmd_protocol(const CommonOptions& common, const ProtocolCliOptions& opts) {
    return run_command("protocol", common, [&](const DensityMatrix& rho, CommandResult& res) {
        Strategy strategy = AutoSaturate{};
        if (opts.ensemble_file) {
            const json doc = [&] {
                try {
                    return json::parse(read_file(*opts.ensemble_file));
                } catch (const json::parse_error& e) {
                    throw Error(ErrorKind::ParseError, e.what());
                }
            }();
            strategy = UserEnsemble{ensemble_from_json(doc, common.tol)};
            res.report["input"]["ensemble_sha256"] = sha256_hex(read_file(*opts.ensemble_file));
        } else {
            PipelineConfig pc;
            pc.seed = common.seed;
            pc.budget = opts.budget;
            strategy = AutoSaturate{pc};
        }
        Mode mode = Enumerate{};
        if (opts.sample) mode = Sample{common.seed, opts.shots};
        const ProtocolTranscript tr =
            run_protocol(rho, strategy, mode, ProtocolOptions{.tol = common.tol, .log_base = common.log_base});

        json& r = res.report["results"];
        r["mode"] = opts.sample ? "sample" : "enumerate";
        r["strategy"] = opts.ensemble_file ? "user_ensemble" : "auto_saturate";
        r["decomposition"] = ensemble_to_json(tr.decomposition);
        r["joint_state"] = {{"dim_a", tr.joint_state.dim_a()},
                            {"dim_b", tr.joint_state.dim_b()},
                            {"amplitudes", vector_to_json(tr.joint_state.amplitudes())}};
        r["alice_basis"] = "computational";
        json outs = json::array();
        for (const auto& o : tr.outcomes) {
            outs.push_back({{"index", o.index},
                            {"probability", o.probability},
                            {"coherence", o.coherence},
                            {"state", vector_to_json(o.state.amplitudes())}});
        }
        r["outcomes"] = std::move(outs);
        r["average_coherence"] = tr.average_coherence;
        r["ceiling"] = tr.ceiling;
        r["fallback_used"] = tr.fallback_used;
        if (tr.certificate) r["certificate"] = certificate_to_json(*tr.certificate);
        if (tr.sample_stats) {
            r["sample"] = {{"shots", opts.shots},
                           {"counts", tr.sample_stats->counts},
                           {"frequencies", tr.sample_stats->frequencies},
                           {"empirical_average", tr.sample_stats->empirical_average},
                           {"standard_error", tr.sample_stats->standard_error}};
        }
        for (const auto& w : tr.warnings) res.report["warnings"].push_back(w);

        std::ostringstream os;
        os << "decomposition (" << tr.decomposition.size() << " members):\n" << ensemble_human(tr.decomposition);
        os << "outcomes:\n";
        for (const auto& o : tr.outcomes) {
            os << "  Alice |" << o.index << ">  p = " << fmt(o.probability) << "  C_r(Bob) = " << fmt(o.coherence) << "\n";
        }
        os << "average coherence = " << fmt(tr.average_coherence) << "\n"
           << "ceiling S(Delta)  = " << fmt(tr.ceiling) << "\n";
        if (tr.sample_stats) {
            os << "sampled average   = " << fmt(tr.sample_stats->empirical_average) << " +/- "
               << fmt(tr.sample_stats->standard_error) << " (" << opts.shots << " shots)\n";
        }
        for (const auto& w : tr.warnings) os << "warning: " << w << "\n";
        res.human = os.str();
    });
}

// ---------------------------------------------------------------------------

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"cohassist: coherence measures, coherence of assistance and assisted distillation"};
    app.require_subcommand(1);
    app.fallthrough();

    CommonOptions common;
    std::string format = "human";
    app.add_option("--tol", common.tol, "Numerical tolerance for every check")->capture_default_str();
    app.add_option("--log-base", common.log_base, "Logarithm base for entropies")->capture_default_str();
    app.add_option("--seed", common.seed, "Seed for every randomized step")->capture_default_str();
    app.add_option("--format", format, "Output format")->check(CLI::IsMember({"human", "machine"}))->capture_default_str();

    auto* validate = app.add_subcommand("validate", "Parse and validate a state file");
    auto* measures = app.add_subcommand("measures", "Relative entropy, l1 and regularized assisted coherence");
    auto* assist = app.add_subcommand("assist", "Numerical lower bound on the coherence of assistance");
    auto* saturate = app.add_subcommand("saturate", "Certify C_a = S(Delta(rho)) with an explicit decomposition");
    auto* protocol = app.add_subcommand("protocol", "Simulate the one-way assisted distillation protocol");
    for (auto* sub : {validate, measures, assist, saturate, protocol}) {
        sub->add_option("state", common.path, "State file (JSON)")->required()->check(CLI::ExistingFile);
    }

    AssistOptions ao;
    assist->add_option("--ensemble-size", ao.ensemble_size, "Ensemble size T (0 = n * rank)")->capture_default_str();
    assist->add_option("--restarts", ao.restarts, "Random restarts")->capture_default_str();
    assist->add_option("--max-iters", ao.max_iters, "Refinement sweeps per restart")->capture_default_str();

    SaturateOptions so;
    saturate->add_option("--budget", so.budget, "Phase-search iterations per ensemble size")->capture_default_str();
    saturate->add_option("--max-T", so.max_ensemble_size, "Largest ensemble size tried (0 = n^2)")->capture_default_str();

    ProtocolCliOptions po;
    std::string mode = "enumerate";
    protocol->add_option("--mode", mode, "Outcome handling")->check(CLI::IsMember({"enumerate", "sample"}))->capture_default_str();
    protocol->add_option("--shots", po.shots, "Shots in sample mode")->capture_default_str();
    protocol->add_option("--ensemble-file", po.ensemble_file, "Use this decomposition instead of searching");
    protocol->add_option("--budget", po.budget, "Phase-search iterations when searching")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInvalidInput;
    }
    for (int i = 1; i < argc; ++i) common.argv.emplace_back(argv[i]);
    po.sample = mode == "sample";

    CommandResult res;
    if (*validate) {
        res = cmd_validate(common);
    } else if (*measures) {
        res = cmd_measures(common);
    } else if (*assist) {
        res = cmd_assist(common, ao);
    } else if (*saturate) {
        res = cmd_saturate(common, so);
    } else {
        res = cmd_protocol(common, po);
    }

    if (format == "machine") {
        out << dump_report(res.report);
    } else if (res.report.value("error", json()).is_null()) {
        out << res.human;
    } else {
        err << res.human;
    }
    return res.exit_code;
}

}  // namespace cohassist::cli
