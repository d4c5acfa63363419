#include "cohassist/protocol.hpp"

#include <algorithm>
#include <sstream>

#include "cohassist/random.hpp"

namespace cohassist {

BipartitePureState build_joint_state(const PureEnsemble& ens) {
    const std::size_t t = ens.size();
    const std::size_t n = ens.dim();
    ComplexVector amps(t * n);
    for (std::size_t k = 0; k < t; ++k) {
        const double s = std::sqrt(ens[k].weight);
        for (std::size_t b = 0; b < n; ++b) amps[k * n + b] = s * ens[k].state[b];
    }
    const double nrm = norm2(amps);
    for (cplx& z : amps) z /= nrm;
    return BipartitePureState::make(t, n, std::move(amps));
}

namespace {

std::vector<Outcome> measure_alice(const BipartitePureState& joint, const std::vector<ComplexVector>& basis,
                                   double log_base, double tol) {
    std::vector<Outcome> out;
    const std::size_t da = joint.dim_a();
    const std::size_t db = joint.dim_b();
    for (std::size_t j = 0; j < basis.size(); ++j) {
        ComplexVector bob(db);
        for (std::size_t a = 0; a < da; ++a) {
            const cplx ca = std::conj(basis[j][a]);
            if (ca == cplx{}) continue;
            for (std::size_t b = 0; b < db; ++b) bob[b] += ca * joint.amp(a, b);
        }
        double p = 0.0;
        for (const cplx& z : bob) p += std::norm(z);
        if (p <= tol) continue;
        PureState st = PureState::normalized(std::move(bob));
        const double c = pure_state_coherence(st, log_base);
        out.push_back(Outcome{j, p, std::move(st), c});
    }
    double total = 0.0;
    for (const auto& o : out) total += o.probability;
    for (auto& o : out) o.probability /= total;
    return out;
}

SampleStats sample_outcomes(const std::vector<Outcome>& outcomes, const Sample& s) {
    if (s.shots == 0) throw Error(ErrorKind::ConfigInvalid, "sample mode needs at least one shot");
    std::vector<double> cdf;
    double acc = 0.0;
    for (const auto& o : outcomes) {
        acc += o.probability;
        cdf.push_back(acc);
    }
    Rng rng(derive_seed(s.seed, 0));
    std::uniform_real_distribution<double> unif(0.0, acc);
    SampleStats st;
    st.counts.assign(outcomes.size(), 0);
    for (std::size_t shot = 0; shot < s.shots; ++shot) {
        const double u = unif(rng);
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        std::size_t idx = static_cast<std::size_t>(it - cdf.begin());
        if (idx >= outcomes.size()) idx = outcomes.size() - 1;
        ++st.counts[idx];
    }
    const double shots = static_cast<double>(s.shots);
    double mean = 0.0;
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
        st.frequencies.push_back(static_cast<double>(st.counts[k]) / shots);
        mean += st.frequencies.back() * outcomes[k].coherence;
    }
    double var = 0.0;
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
        const double d = outcomes[k].coherence - mean;
        var += static_cast<double>(st.counts[k]) * d * d;
    }
    if (s.shots > 1) var /= (shots - 1.0);
    st.empirical_average = mean;
    st.standard_error = std::sqrt(var / shots);
    return st;
}

}  // namespace

ProtocolTranscript run_protocol(const DensityMatrix& rho, const Strategy& strategy, const Mode& mode,
                                const ProtocolOptions& opts) {
    std::optional<PureEnsemble> decomposition;
    std::optional<SaturationCertificate> certificate;
    bool fallback = false;
    std::vector<std::string> warnings;

    if (const auto* user = std::get_if<UserEnsemble>(&strategy)) {
        if (user->ensemble.dim() != rho.dim()) throw Error(ErrorKind::ShapeMismatch, "ensemble dimension differs");
        ComplexMatrix mixed(rho.dim(), rho.dim());
        for (const auto& m : user->ensemble.members()) mixed += m.weight * m.state.projector();
        const double dist = frobenius_distance(mixed, rho.matrix());
        if (dist > opts.tol) {
            std::ostringstream os;
            os << "ensemble does not decompose the state (Frobenius distance " << dist << ")";
            throw Error(ErrorKind::InvalidEnsemble, os.str());
        }
        decomposition = user->ensemble;
    } else {
        PipelineConfig pc = std::get<AutoSaturate>(strategy).pipeline;
        pc.tol = opts.tol;
        pc.optimizer.log_base = opts.log_base;
        pc.attach_lower_bound = false;
        SaturationCertificate cert = saturation_pipeline(rho, pc);
        if (cert.verdict == Verdict::Saturated) {
            decomposition = *cert.witness;
        } else {
            try {
                OptimizerConfig oc = pc.optimizer;
                oc.seed = pc.seed;
                oc.tol = opts.tol;
                AssistanceResult ar = maximize_assistance(rho, oc);
                decomposition = std::move(ar.witness);
                fallback = true;
                warnings.push_back("no saturating decomposition found; using the optimizer witness");
            } catch (const Error& e) {
                throw Error(ErrorKind::NoDecompositionFound, e.what());
            }
        }
        certificate = std::move(cert);
    }

    const BipartitePureState joint = build_joint_state(*decomposition);
    const std::size_t t = joint.dim_a();
    std::vector<ComplexVector> basis(t, ComplexVector(t));
    for (std::size_t k = 0; k < t; ++k) basis[k][k] = 1.0;

    std::vector<Outcome> outcomes = measure_alice(joint, basis, opts.log_base, opts.tol);
    double avg = 0.0;
    for (const auto& o : outcomes) avg += o.probability * o.coherence;

    std::optional<SampleStats> stats;
    if (const auto* s = std::get_if<Sample>(&mode)) stats = sample_outcomes(outcomes, *s);

    return ProtocolTranscript{rho,
                              std::move(*decomposition),
                              joint,
                              std::move(basis),
                              std::move(outcomes),
                              avg,
                              regularized_assistance(rho, opts.log_base),
                              mode,
                              std::move(stats),
                              std::move(certificate),
                              fallback,
                              std::move(warnings)};
}

}  // namespace cohassist
