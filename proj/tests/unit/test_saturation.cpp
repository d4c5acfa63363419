#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cohassist/coherence.hpp"
#include "cohassist/random.hpp"
#include "cohassist/saturation.hpp"
#include "support.hpp"

using namespace cohassist;
using testsupport::max_abs_diff;

namespace {

const double kPi = std::numbers::pi;
const double kS = 1.0 / std::numbers::sqrt2;
const double kLog3 = std::log(3.0) / std::log(2.0);

DensityMatrix half_identity() { return validate_density(ComplexMatrix{{0.5, 0.0}, {0.0, 0.5}}); }

// Every saturated certificate must satisfy both characterizations at once.
void expect_consistent(const SaturationCertificate& c, const DensityMatrix& rho) {
    if (c.verdict != Verdict::Saturated) return;
    ASSERT_TRUE(c.witness.has_value());
    const auto target = testsupport::diag_of(rho.matrix());
    EXPECT_LE(testsupport::member_diag_defect(*c.witness, target), 1e-9);
    const double ceiling = testsupport::shannon_bits(target);
    for (const auto& m : c.witness->members()) {
        std::vector<double> d;
        for (const cplx& a : m.state.amplitudes()) d.push_back(std::norm(a));
        EXPECT_NEAR(testsupport::shannon_bits(d), ceiling, 1e-9);
    }
    EXPECT_LE(frobenius_distance(testsupport::direct_mix(*c.witness), rho.matrix()), 1e-9);
}

// Ensemble member k carries a minus sign on components 0..k-1 over |amplitude|^2 = diag.
ComplexMatrix staircase_state(const std::vector<double>& diag, const std::vector<double>& p) {
    const std::size_t n = diag.size();
    ComplexMatrix rho(n, n);
    for (std::size_t k = 0; k < p.size(); ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const double si = i < k ? -1.0 : 1.0, sj = j < k ? -1.0 : 1.0;
                rho(i, j) += p[k] * si * sj * std::sqrt(diag[i] * diag[j]);
            }
    return rho;
}

}  // namespace

TEST(PairIndex, OrderAndCount) {
    EXPECT_EQ(pair_count(2), 1u);
    EXPECT_EQ(pair_count(4), 6u);
    std::size_t expect = 0;
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = i + 1; j < 5; ++j) EXPECT_EQ(pair_index(i, j, 5), expect++);
}

TEST(CoherenceVectorTest, Examples) {
    const auto b1 = coherence_vector(half_identity());
    ASSERT_EQ(b1.entries.size(), 2u);
    EXPECT_EQ(b1.entries[0], cplx(0.0));
    EXPECT_EQ(b1.entries[1], cplx(1.0));

    const auto b2 = coherence_vector(validate_density(testsupport::uniform_qutrit(0, 0, 0)));
    EXPECT_EQ(b2.entries, (ComplexVector{0.0, 0.0, 0.0, 1.0}));

    const auto b3 = coherence_vector(validate_density(ComplexMatrix{{0.5, 0.25}, {0.25, 0.5}}));
    EXPECT_NEAR(b3.entries[0].real(), 0.5, 1e-15);
    EXPECT_EQ(b3.entries[1], cplx(1.0));
}

TEST(CoherenceVectorTest, ZeroDiagonalGivesZero) {
    const std::vector<double> d{0.5, 0.5, 0.0};
    const auto b = coherence_vector(validate_density(ComplexMatrix::diagonal(d)));
    EXPECT_EQ(b.pair(0, 2), cplx(0.0));
    EXPECT_EQ(b.pair(1, 2), cplx(0.0));
}

TEST(CoherenceVectorTest, ModulusAtMostOneProperty) {
    std::mt19937_64 rng(6);
    for (int t = 0; t < 50; ++t) {
        const auto b = coherence_vector(testsupport::random_state(2 + t % 4, rng));
        for (std::size_t r = 0; r + 1 < b.entries.size(); ++r) EXPECT_LE(std::abs(b.entries[r]), 1.0 + 1e-12);
    }
}

TEST(CheckTheorem1, Examples) {
    const auto pm = PureEnsemble::make(
        {{0.5, PureState::from_amplitudes({kS, kS})}, {0.5, PureState::from_amplitudes({kS, -kS})}});
    const auto ok = check_theorem1(pm, half_identity());
    EXPECT_EQ(ok.verdict, Verdict::Saturated);
    expect_consistent(ok, half_identity());

    const auto bad = check_theorem1(PureEnsemble::make({{1.0, PureState::basis(2, 0)}}), half_identity());
    EXPECT_EQ(bad.verdict, Verdict::NotFound);
    EXPECT_NEAR(bad.residual_mix, std::sqrt(0.5), 1e-15);
    EXPECT_FALSE(bad.witness.has_value());
}

TEST(CheckTheorem1, EigenEnsembleOfGenericQutrit) {
    // Eigenvectors of a generic state do not share its diagonal.
    std::mt19937_64 rng(13);
    const auto rho = testsupport::random_state(3, rng);
    const auto eig = hjw_rotate(rho, ComplexMatrix::identity(3));
    const auto c = check_theorem1(eig, rho);
    EXPECT_LT(c.residual_mix, 1e-10);
    EXPECT_GT(c.residual_diag, 1e-3);
    EXPECT_EQ(c.verdict, Verdict::NotFound);
}

TEST(PhaseMatrix, QubitPattern) {
    const auto pa = PhaseAssignment::from_table(2, {{0.0}, {kPi}});
    const auto a = build_phase_matrix(pa);
    EXPECT_LT(max_abs_diff(a, ComplexMatrix{{1.0, -1.0}, {1.0, 1.0}}), 1e-15);
}

TEST(PhaseMatrix, QutritSignTable) {
    // Adjacent angles (theta_01, theta_12) per member: (0,0), (pi,0), (pi,pi), (0,pi).
    const auto pa = PhaseAssignment::from_adjacent(3, {{0, 0}, {kPi, 0}, {kPi, kPi}, {0, kPi}});
    const auto a = build_phase_matrix(pa);
    // Rows in pair order 01, 02, 12: the 12/23/13 display reordered.
    const ComplexMatrix expect{{1, -1, -1, 1}, {1, -1, 1, -1}, {1, 1, -1, -1}, {1, 1, 1, 1}};
    EXPECT_LT(max_abs_diff(a, expect), 1e-15);
}

TEST(PhaseMatrix, ViolatedChain) {
    const auto pa = PhaseAssignment::from_table(3, {{0.3, 0.0, 0.4}});
    try {
        build_phase_matrix(pa);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ConstraintViolation);
    }
    // Telescoped tables always satisfy the chain.
    EXPECT_NO_THROW(PhaseAssignment::from_adjacent(4, {{1.0, 2.0, 3.0}}).validate());
}

TEST(SolveProbabilities, QubitClosedForm) {
    const auto rho = validate_density(ComplexMatrix{{0.6, 0.3}, {0.3, 0.4}});
    const double r = 0.3 / std::sqrt(0.24);
    const auto sol = solve_probabilities(PhaseAssignment::from_table(2, {{0.0}, {kPi}}), coherence_vector(rho));
    EXPECT_TRUE(sol.feasible);
    EXPECT_NEAR(sol.p[0], 0.5 * (1 + r), 1e-12);
    EXPECT_NEAR(sol.p[1], 0.5 * (1 - r), 1e-12);
}

TEST(SolveProbabilities, QutritClosedFormAndInfeasible) {
    const auto pa = PhaseAssignment::from_adjacent(3, {{0, 0}, {kPi, 0}, {kPi, kPi}, {0, kPi}});
    const double r1 = 0.2, r2 = 0.3, r3 = -0.1;
    const auto sol = solve_probabilities(pa, coherence_vector(validate_density(testsupport::uniform_qutrit(r1, r2, r3))));
    EXPECT_TRUE(sol.feasible);
    EXPECT_NEAR(sol.p[0], (r1 + r2 + r3 + 1) / 4, 1e-12);
    EXPECT_NEAR(sol.p[1], (r2 - r1 - r3 + 1) / 4, 1e-12);
    EXPECT_NEAR(sol.p[2], (r3 - r1 - r2 + 1) / 4, 1e-12);
    EXPECT_NEAR(sol.p[3], (r1 - r2 - r3 + 1) / 4, 1e-12);

    // (1, 1, -1) makes r3 - r1 - r2 + 1 = -2, so no nonnegative solution exists.
    CoherenceVector b{3, {1.0, -1.0, 1.0, 1.0}};
    EXPECT_FALSE(solve_probabilities(pa, b).feasible);
}

TEST(RankOneMember, SharesDiagonalAndPhases) {
    const DiagonalState d{{0.2, 0.3, 0.5}};
    const auto pa = PhaseAssignment::from_adjacent(3, {{0.7, -1.1}});
    const auto psi = rank_one_member(d, pa.column(0));
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(std::norm(psi[i]), d.probs[i], 1e-15);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = i + 1; j < 3; ++j) {
            const cplx z = psi[i] * std::conj(psi[j]);
            EXPECT_NEAR(std::abs(std::arg(z * std::polar(1.0, -pa.theta(0, i, j)))), 0.0, 1e-12);
        }
}

TEST(QubitDecomposition, RealCase) {
    const auto rho = validate_density(ComplexMatrix{{0.5, 0.25}, {0.25, 0.5}});
    const auto ens = qubit_decomposition(rho);
    ASSERT_EQ(ens.size(), 2u);
    EXPECT_NEAR(ens[0].weight, 0.75, 1e-15);
    EXPECT_NEAR(ens[1].weight, 0.25, 1e-15);
    EXPECT_TRUE(same_ray(ens[0].state, PureState::from_amplitudes({kS, kS})));
    EXPECT_TRUE(same_ray(ens[1].state, PureState::from_amplitudes({kS, -kS})));
    EXPECT_LT(max_abs_diff(testsupport::direct_mix(ens), rho.matrix()), 1e-15);
}

TEST(QubitDecomposition, HalfIdentity) {
    const auto ens = qubit_decomposition(half_identity());
    ASSERT_EQ(ens.size(), 2u);
    EXPECT_NEAR(ens[0].weight, 0.5, 1e-15);
    EXPECT_TRUE(same_ray(ens[0].state, PureState::from_amplitudes({kS, kS})));
    EXPECT_TRUE(same_ray(ens[1].state, PureState::from_amplitudes({kS, -kS})));
}

TEST(QubitDecomposition, ComplexCase) {
    const auto rho = validate_density(ComplexMatrix{{0.5, cplx(0, 0.25)}, {cplx(0, -0.25), 0.5}});
    const auto ens = qubit_decomposition(rho);
    ASSERT_EQ(ens.size(), 2u);
    EXPECT_NEAR(ens[0].weight, 0.75, 1e-15);
    EXPECT_NEAR(ens[1].weight, 0.25, 1e-15);
    EXPECT_TRUE(same_ray(ens[0].state, PureState::from_amplitudes({kS, kS * std::polar(1.0, -kPi / 2)})));
    EXPECT_TRUE(same_ray(ens[1].state, PureState::from_amplitudes({kS, kS * std::polar(1.0, -3 * kPi / 2)})));
    EXPECT_LT(max_abs_diff(testsupport::direct_mix(ens), rho.matrix()), 1e-15);
}

TEST(QubitDecomposition, DegenerateDiagonal) {
    const std::vector<double> d{1.0, 0.0};
    const auto ens = qubit_decomposition(validate_density(ComplexMatrix::diagonal(d)));
    ASSERT_EQ(ens.size(), 1u);
    EXPECT_TRUE(same_ray(ens[0].state, PureState::basis(2, 0)));
}

TEST(QutritPolytope, Membership) {
    EXPECT_TRUE(inside_polytope({0, 0, 0}));
    EXPECT_TRUE(inside_polytope({1, 1, 1}));
    EXPECT_FALSE(inside_polytope({1, 1, -1}));
    const auto w = qutrit_weights({1, 1, -1});
    EXPECT_NEAR(w[2], -0.5, 1e-15);  // (r3 - r1 - r2 + 1) / 4
}

TEST(QutritPolytope, GaugeRemovesRemovablePhases) {
    // Conjugating a real qutrit by diag(1, e^{ia}, e^{ib}) keeps it in the same polytope position.
    const auto base = testsupport::uniform_qutrit(0.3, 0.2, 0.1);
    const ComplexVector u{1.0, std::polar(1.0, 0.7), std::polar(1.0, -1.9)};
    ComplexMatrix rot(3, 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) rot(i, j) = u[i] * base(i, j) * std::conj(u[j]);
    const auto rho = validate_density(rot);
    const auto pr = qutrit_polytope(rho);
    EXPECT_TRUE(pr.gauge_applied);
    EXPECT_TRUE(pr.inside);
    EXPECT_NEAR(pr.coords.r1, 0.3, 1e-12);
    EXPECT_NEAR(pr.coords.r2, 0.2, 1e-12);
    EXPECT_NEAR(pr.coords.r3, 0.1, 1e-12);
    const auto ens = qutrit_decomposition(rho);
    EXPECT_LT(frobenius_distance(testsupport::direct_mix(ens), rho.matrix()), 1e-12);
    EXPECT_EQ(check_theorem1(ens, rho).verdict, Verdict::Saturated);
}

TEST(QutritPolytope, IrremovablePhaseIsNotApplicable) {
    // Cycle phase 0.9 on 01 -> 12 -> 20 cannot be gauged away.
    const double t = 1.0 / 3.0, c = 0.2 * t;
    const ComplexMatrix m{{t, c * std::polar(1.0, 0.9), c}, {c * std::polar(1.0, -0.9), t, c}, {c, c, t}};
    try {
        qutrit_polytope(validate_density(m));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotApplicable);
    }
}

TEST(QutritDecomposition, MaximallyMixed) {
    const auto rho = validate_density(testsupport::uniform_qutrit(0, 0, 0));
    const auto ens = qutrit_decomposition(rho);
    ASSERT_EQ(ens.size(), 4u);
    for (const auto& m : ens.members()) EXPECT_NEAR(m.weight, 0.25, 1e-15);
    EXPECT_NEAR(ensemble_average_coherence(ens), kLog3, 1e-12);
    const auto c = check_theorem1(ens, rho);
    EXPECT_EQ(c.verdict, Verdict::Saturated);
    expect_consistent(c, rho);
}

TEST(QutritDecomposition, PureCorner) {
    const auto rho = validate_density(testsupport::uniform_qutrit(1, 1, 1));
    const auto ens = qutrit_decomposition(rho);
    ASSERT_EQ(ens.size(), 1u);
    EXPECT_NEAR(ens[0].weight, 1.0, 1e-15);
}

TEST(QutritDecomposition, NonUniformDiagonal) {
    // diag (1/4, 1/4, 1/2) with r = (1/2, 0, 0): weights (3/8, 1/8, 1/8, 3/8).
    const double c = 0.5 * 0.25;
    const auto rho = validate_density(ComplexMatrix{{0.25, c, 0.0}, {c, 0.25, 0.0}, {0.0, 0.0, 0.5}});
    const auto ens = qutrit_decomposition(rho);
    ASSERT_EQ(ens.size(), 4u);
    const double expect[4] = {3.0 / 8, 1.0 / 8, 1.0 / 8, 3.0 / 8};
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(ens[k].weight, expect[k], 1e-15);
    EXPECT_LT(max_abs_diff(testsupport::direct_mix(ens), rho.matrix()), 1e-15);
}

TEST(QutritDecomposition, OutsideThrows) {
    // (0.9, 0.9, 0.85) is inside; (0.6, 0.6, -0.1) is a valid state (determinant 0.198/27) with
    // r3 - r1 - r2 + 1 = -0.3.
    const auto rho = validate_density(testsupport::uniform_qutrit(0.9, 0.9, 0.85));
    EXPECT_TRUE(qutrit_polytope(rho).inside);
    const auto out = validate_density(testsupport::uniform_qutrit(0.6, 0.6, -0.1));
    EXPECT_FALSE(qutrit_polytope(out).inside);
    try {
        qutrit_decomposition(out);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::OutsidePolytope);
    }
}

TEST(NDimDecomposition, PureState) {
    const auto rho = validate_density(testsupport::uniform_qutrit(1, 1, 1));
    const auto res = ndim_decomposition(rho);
    ASSERT_TRUE(res.feasible);
    EXPECT_NEAR(res.p[0], 1.0, 1e-12);
    EXPECT_NEAR(res.p[1], 0.0, 1e-12);
    EXPECT_NEAR(res.p[2], 0.0, 1e-12);
}

TEST(NDimDecomposition, HandSolvedQutrit) {
    // Member k flips the sign of components 0..k-1, so
    //   r01 = p0 - p1 + p2,  r12 = p0 + p1 - p2,  r02 = p0 - p1 - p2,  p0 + p1 + p2 = 1.
    // With r01 = r12 = 0.75 and r02 = 0.5: r01 + r12 = 2 p0 gives p0 = 0.75, then r01 - r12 = 0
    // gives p1 = p2 = 0.125; r02 = 0.75 - 0.25 = 0.5 checks out.
    const auto rho = validate_density(testsupport::uniform_qutrit(0.75, 0.75, 0.5));
    const auto res = ndim_decomposition(rho);
    ASSERT_TRUE(res.feasible);
    EXPECT_NEAR(res.p[0], 0.75, 1e-12);
    EXPECT_NEAR(res.p[1], 0.125, 1e-12);
    EXPECT_NEAR(res.p[2], 0.125, 1e-12);
    EXPECT_LE(res.residual, 1e-9);
    ASSERT_TRUE(res.ensemble.has_value());
    EXPECT_LT(max_abs_diff(testsupport::direct_mix(*res.ensemble), rho.matrix()), 1e-12);
    EXPECT_NEAR(ensemble_average_coherence(*res.ensemble), kLog3, 1e-12);
}

TEST(NDimDecomposition, MaximallyMixedIsOutsideTheSignFamily) {
    // r = 0: r01 + r12 = 0 forces p0 = 0, then r02 = -1 != 0. The qutrit constructor still works.
    const auto rho = validate_density(testsupport::uniform_qutrit(0, 0, 0));
    const auto res = ndim_decomposition(rho);
    EXPECT_FALSE(res.feasible);
    EXPECT_FALSE(res.reason.empty());
    EXPECT_NO_THROW(qutrit_decomposition(rho));
}

TEST(NDimDecomposition, RecoversStaircaseWeightsProperty) {
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = 3 + t % 4;
        std::vector<double> d(n), p(n);
        double sd = 0.0, sp = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sd += (d[i] = u(rng));
            sp += (p[i] = u(rng));
        }
        for (std::size_t i = 0; i < n; ++i) {
            d[i] /= sd;
            p[i] /= sp;
        }
        const auto rho = validate_density(staircase_state(d, p));
        const auto res = ndim_decomposition(rho);
        ASSERT_TRUE(res.feasible);
        for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(res.p[k], p[k], 1e-10);
        const auto c = check_theorem1(*res.ensemble, rho);
        EXPECT_EQ(c.verdict, Verdict::Saturated);
        expect_consistent(c, rho);
    }
}

TEST(PhaseSearch, PureStateTrivial) {
    const auto rho = validate_density(testsupport::uniform_qutrit(1, 1, 1));
    const auto c = search_phase_feasibility(rho);
    EXPECT_EQ(c.verdict, Verdict::Saturated);
    EXPECT_EQ(c.ensemble_size, 1u);
}

TEST(PhaseSearch, ZeroBudgetFindsNothing) {
    std::mt19937_64 rng(1);
    const auto rho = testsupport::random_state(4, rng);
    PhaseSearchOptions opt;
    opt.budget = 0;
    const auto c = search_phase_feasibility(rho, opt);
    EXPECT_EQ(c.verdict, Verdict::NotFound);
    EXPECT_FALSE(c.witness.has_value());
}

TEST(PhaseSearch, CertificatesAreConsistentProperty) {
    std::mt19937_64 rng(19);
    int saturated = 0;
    for (int t = 0; t < 10; ++t) {
        const auto rho = testsupport::random_state(3, rng);
        PhaseSearchOptions opt;
        opt.ensemble_size = 9;
        opt.seed = static_cast<std::uint64_t>(t);
        const auto c = search_phase_feasibility(rho, opt);
        if (c.verdict == Verdict::Saturated) {
            ++saturated;
            ASSERT_TRUE(c.phases.has_value());
            EXPECT_NO_THROW(c.phases->validate());
        }
        expect_consistent(c, rho);
    }
    RecordProperty("saturated", saturated);
}

TEST(Pipeline, QubitUsesQubitMethod) {
    std::mt19937_64 rng(23);
    for (int t = 0; t < 20; ++t) {
        const auto rho = testsupport::random_state(2, rng);
        const auto c = saturation_pipeline(rho);
        EXPECT_EQ(c.verdict, Verdict::Saturated);
        EXPECT_EQ(c.method, Method::Qubit);
        expect_consistent(c, rho);
    }
}

TEST(Pipeline, PolytopeQutritUsesQutritMethod) {
    const auto rho = validate_density(testsupport::uniform_qutrit(0.5, 0.5, 0.3));
    const auto c = saturation_pipeline(rho);
    EXPECT_EQ(c.verdict, Verdict::Saturated);
    EXPECT_EQ(c.method, Method::QutritReal);
    expect_consistent(c, rho);
}

TEST(Pipeline, StaircaseQuquartUsesSignPattern) {
    const std::vector<double> d{0.1, 0.2, 0.3, 0.4}, p{0.4, 0.3, 0.2, 0.1};
    const auto rho = validate_density(staircase_state(d, p));
    const auto c = saturation_pipeline(rho);
    EXPECT_EQ(c.verdict, Verdict::Saturated);
    EXPECT_EQ(c.method, Method::NDimSignPattern);
    expect_consistent(c, rho);
}

TEST(Pipeline, ZeroBudgetOnComplexQuquartIsNotFound) {
    std::mt19937_64 rng(29);
    const auto rho = testsupport::random_state(4, rng);
    PipelineConfig cfg;
    cfg.budget = 0;
    cfg.optimizer.restarts = 2;
    const auto c = saturation_pipeline(rho, cfg);
    EXPECT_EQ(c.verdict, Verdict::NotFound);
    ASSERT_TRUE(c.lower_bound.has_value());
    EXPECT_LE(*c.lower_bound, regularized_assistance(rho) + 1e-12);
}

TEST(Pipeline, CompressesZeroDiagonal) {
    // A qubit embedded in a qutrit with an empty level.
    const auto rho = validate_density(ComplexMatrix{{0.6, 0.0, 0.2}, {0.0, 0.0, 0.0}, {0.2, 0.0, 0.4}});
    const auto c = saturation_pipeline(rho);
    EXPECT_EQ(c.verdict, Verdict::Saturated);
    EXPECT_EQ(c.method, Method::Qubit);
    expect_consistent(c, rho);
}
