#include "doctest.h"
#include "helpers.hpp"

#include "cqlab/typicality.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace cqlab;

namespace {

Matrix ket(int i, int dim) {
    Matrix v = Matrix::Zero(dim, 1);
    v(i, 0) = 1.0;
    return v;
}

Matrix proj(int i, int dim) { return ket(i, dim) * ket(i, dim).adjoint(); }

CqBlockChannel noiseless_binary() {
    return CqBlockChannel::memoryless(Alphabet::of_size(2),
                                      {DensityOperator(proj(0, 2)), DensityOperator(proj(1, 2))});
}

InputProcess uniform_iid(int k) {
    return InputProcess::iid(Alphabet::of_size(k), std::vector<double>(k, 1.0 / k));
}

Spectrum diag_spectrum(std::vector<double> values) {
    std::sort(values.rbegin(), values.rend());
    Spectrum s;
    s.eigenvalues = Eigen::Map<RealVector>(values.data(), values.size());
    s.eigenvectors = Matrix::Identity(values.size(), values.size());
    return s;
}

// Smallest subset of the spectrum reaching the target mass, tried exhaustively.
long min_covering_count(const std::vector<double>& values, double eps) {
    const int k = static_cast<int>(values.size());
    long best = k;
    for (int mask = 0; mask < (1 << k); ++mask) {
        double mass = 0.0;
        int count = 0;
        for (int i = 0; i < k; ++i)
            if (mask & (1 << i)) {
                mass += values[i];
                ++count;
            }
        if (mass >= 1.0 - eps) best = std::min<long>(best, count);
    }
    return best;
}

}  // namespace

TEST_CASE("entropy typical projection") {
    SUBCASE("flat spectra are kept whole") {
        auto spec = diag_spectrum({0.25, 0.25, 0.25, 0.25});
        auto p = entropy_typical_projection(spec, 2, 1.0, 0.05);
        CHECK(p.rank() == 4);
    }

    SUBCASE("pure states keep their single line") {
        auto spec = diag_spectrum({1.0, 0.0});
        CHECK(entropy_typical_projection(spec, 3, 0.0, 0.1).rank() == 1);
    }

    SUBCASE("binomial spectrum keeps exactly the central shell") {
        // Fourth power of diag(0.75, 0.25); the window around the entropy rate
        // admits only the four eigenvalues 0.75^3 * 0.25.
        std::vector<double> eigs;
        for (int idx = 0; idx < 16; ++idx) {
            int ones = __builtin_popcount(static_cast<unsigned>(idx));
            eigs.push_back(std::pow(0.75, 4 - ones) * std::pow(0.25, ones));
        }
        auto spec = diag_spectrum(eigs);
        double s = testutil::binary_entropy(0.25);
        auto p = entropy_typical_projection(spec, 4, s, 0.3);
        CHECK(p.rank() == 4);
        double mass = 0.0;
        for (int i = 0; i < 16; ++i)
            mass += spec.eigenvalues(i) * p.matrix()(i, i).real();
        CHECK(mass == doctest::Approx(0.421875).epsilon(1e-12));
    }

    SUBCASE("window boundaries are excluded") {
        auto spec = diag_spectrum({0.5, 0.5});
        CHECK(entropy_typical_projection(spec, 1, 1.0, 0.2).rank() == 2);
        // With s = 1.2 and eps = 0.2 the upper edge sits exactly on 0.5.
        CHECK(entropy_typical_projection(spec, 1, 1.2, 0.2).rank() == 0);
    }
}

TEST_CASE("block spectrum views") {
    auto j = build_joint(uniform_iid(2), noiseless_binary(), 2);
    auto view = joint_spectrum_view(j);
    double total = 0.0;
    for (double v : view.values()) total += v;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));

    auto sel = entropy_typical_selection(view, 2, 1.0, 0.1);
    long picked = 0;
    for (const auto& s : sel) picked += static_cast<long>(s.eigenvector_indices.size());
    CHECK(picked == 4);
}

TEST_CASE("dimension covering exponent") {
    RealVector flat(4);
    flat << 0.25, 0.25, 0.25, 0.25;
    CHECK(dimension_covering_exponent(flat, 0.2) == doctest::Approx(2.0));
    CHECK(dimension_covering_exponent(flat, 0.3) == doctest::Approx(std::log2(3.0)));

    SUBCASE("greedy count matches the exhaustive subset search") {
        std::mt19937 gen(127);
        for (int rep = 0; rep < 20; ++rep) {
            auto values = testutil::random_simplex(6, gen);
            double eps = 0.05 + 0.4 * (gen() % 100) / 100.0;
            RealVector v = Eigen::Map<RealVector>(values.data(), 6);
            double got = dimension_covering_exponent(v, eps);
            CHECK(std::llround(std::exp2(got)) == min_covering_count(values, eps));
        }
    }

    SUBCASE("weighted product spectra agree with their dense expansion") {
        auto ws = iid_product_spectrum({0.75, 0.25}, 4);
        CHECK(ws.total_count() == doctest::Approx(16.0));
        CHECK(ws.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
        std::vector<double> dense;
        for (int idx = 0; idx < 16; ++idx) {
            int ones = __builtin_popcount(static_cast<unsigned>(idx));
            dense.push_back(std::pow(0.75, 4 - ones) * std::pow(0.25, ones));
        }
        RealVector v = Eigen::Map<RealVector>(dense.data(), 16);
        for (double eps : {0.1, 0.25, 0.5})
            CHECK(dimension_covering_exponent(ws, eps) ==
                  doctest::Approx(dimension_covering_exponent(v, eps)).epsilon(1e-12));
    }
}

TEST_CASE("iid product spectrum composition counts") {
    auto ws = iid_product_spectrum({0.6, 0.4}, 3);
    REQUIRE(ws.atoms.size() == 4);
    double mass = 0.0, count = 0.0;
    for (const auto& a : ws.atoms) {
        mass += a.value * a.multiplicity;
        count += a.multiplicity;
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(count == doctest::Approx(8.0));
}

TEST_CASE("pinched entropy") {
    std::mt19937 gen(131);

    SUBCASE("identity pinching changes nothing") {
        auto d = testutil::random_density(4, gen);
        auto rep = pinched_entropy(ProjectionOperator::identity(4), d);
        CHECK(rep.pinched_total() == doctest::Approx(rep.s_original).epsilon(1e-9));
    }

    SUBCASE("commuting pinching changes nothing") {
        Matrix dm = Matrix::Zero(3, 3);
        dm(0, 0) = 0.5;
        dm(1, 1) = 0.3;
        dm(2, 2) = 0.2;
        Matrix qm = Matrix::Zero(3, 3);
        qm(0, 0) = 1.0;
        qm(1, 1) = 1.0;
        auto rep = pinched_entropy(ProjectionOperator(qm), DensityOperator(dm));
        CHECK(rep.pinched_total() == doctest::Approx(rep.s_original).epsilon(1e-9));
    }

    SUBCASE("pinching costs at most one bit") {
        for (int rep = 0; rep < 50; ++rep) {
            int dim = 2 + static_cast<int>(gen() % 5);
            auto d = testutil::random_density(dim, gen);
            auto q = testutil::random_projection(dim, 1 + static_cast<int>(gen() % dim), gen);
            auto r = pinched_entropy(q, d);
            CHECK(r.pinched_total() >= r.s_original - 1e-9);
            CHECK(r.pinched_total() <= r.s_original + 1.0 + 1e-9);
        }
    }

    SUBCASE("dimension mismatch is rejected") {
        auto d = testutil::random_density(3, gen);
        CHECK_THROWS_AS(pinched_entropy(ProjectionOperator::identity(2), d), ArgumentError);
    }
}

TEST_CASE("restricted typicality") {
    std::mt19937 gen(137);

    SUBCASE("identity restriction reduces to plain typicality") {
        auto d = testutil::random_density(4, gen);
        double s = von_neumann_entropy(d);
        auto full = entropy_typical_projection(eigh(d.base()), 1, s, 0.3);
        auto restricted = restricted_typical(ProjectionOperator::identity(4), d, 1, s, 0.3);
        CHECK((full.matrix() - restricted.matrix()).cwiseAbs().maxCoeff() < 1e-9);
    }

    SUBCASE("orthogonal restriction is empty") {
        DensityOperator d(proj(0, 2));
        auto r = restricted_typical(ProjectionOperator(proj(1, 2)), d, 1, 0.0, 0.5);
        CHECK(r.rank() == 0);
    }

    SUBCASE("selected lines obey the window, rejected ones do not") {
        auto d = testutil::random_density(5, gen);
        auto q = testutil::random_projection(5, 3, gen);
        const int n = 2;
        const double s = 0.6, eps = 0.25;
        auto r = restricted_typical(q, d, n, s, eps);

        CHECK((r.matrix() * q.matrix() - r.matrix()).cwiseAbs().maxCoeff() < 1e-9);
        CHECK((q.matrix() * r.matrix() - r.matrix()).cwiseAbs().maxCoeff() < 1e-9);

        const double lo = std::exp2(-n * (s + eps)), hi = std::exp2(-n * (s - eps));
        Matrix pinched = q.matrix() * d.matrix() * q.matrix();
        auto spec = eigh(pinched);
        for (int i = 0; i < spec.dim(); ++i) {
            Matrix v = spec.eigenvectors.col(i);
            double inside = (v.adjoint() * r.matrix() * v)(0, 0).real();
            bool in_window = spec.eigenvalues(i) > lo && spec.eigenvalues(i) < hi;
            CHECK(inside == doctest::Approx(in_window ? 1.0 : 0.0).epsilon(1e-8));
        }
    }
}

TEST_CASE("conditional typicality pipeline") {
    SUBCASE("noiseless blocks are all kept with rank-one decoding sets") {
        auto rep = conditional_typicality_pipeline(uniform_iid(2), noiseless_binary(), 2, 0.5);
        CHECK(rep.n == 2);
        REQUIRE(rep.typical.size() == 4);
        CHECK(rep.delta_n == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(rep.p_typical_mass == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(rep.eta_prime == doctest::Approx(0.0).epsilon(1e-12));
        for (const auto& e : rep.typical) {
            CHECK(e.c_trace() == 1);
            CHECK(e.success == doctest::Approx(1.0).epsilon(1e-12));
        }
        CHECK(rep.s_joint_rate == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(rep.s_conditional_rate == doctest::Approx(0.0).epsilon(1e-9));
    }

    SUBCASE("identical signals share one conditional projection") {
        // Eigenvalues 0.6 and 0.4 keep every product eigenvalue inside the
        // windows at this epsilon, so the whole support survives.
        std::mt19937 gen(139);
        Matrix u = testutil::random_unitary(2, gen);
        Matrix base = Matrix::Zero(2, 2);
        base(0, 0) = 0.6;
        base(1, 1) = 0.4;
        DensityOperator d(Matrix(u * base * u.adjoint()));
        auto ch = CqBlockChannel::memoryless(Alphabet::of_size(2), {d, d});
        auto rep = conditional_typicality_pipeline(uniform_iid(2), ch, 2, 0.4);
        REQUIRE(rep.typical.size() >= 2);
        Matrix first = rep.typical[0].projection().matrix();
        for (const auto& e : rep.typical)
            CHECK((e.projection().matrix() - first).cwiseAbs().maxCoeff() < 1e-10);
    }

    SUBCASE("report fields are internally consistent") {
        std::mt19937 gen(149);
        auto ch = testutil::random_memoryless(2, 2, gen);
        auto rep = conditional_typicality_pipeline(uniform_iid(2), ch, 3, 0.3);
        double kept = 0.0;
        for (const auto& e : rep.typical) {
            CHECK(e.success >= 1.0 - rep.delta_n - 1e-12);
            kept += e.p * e.success;
        }
        CHECK(kept >= (1.0 - rep.delta_n) * rep.p_typical_mass - 1e-12);
        CHECK(rep.eta >= 0.0);
        CHECK(rep.eta_prime >= rep.eta - 1e-12);
    }

    SUBCASE("an empty selection is a valid outcome with a diagnostic") {
        auto p = InputProcess::iid(Alphabet::of_size(2), {0.9, 0.1});
        auto rep = conditional_typicality_pipeline(p, noiseless_binary(), 1, 0.01);
        CHECK(rep.typical.empty());
        CHECK_FALSE(rep.diagnostic.empty());
    }

    SUBCASE("stage projections dominate each other per block") {
        std::mt19937 gen(151);
        auto ch = testutil::random_memoryless(2, 2, gen);
        auto rep = conditional_typicality_pipeline(uniform_iid(2), ch, 2, 0.35, true);
        REQUIRE(rep.debug.has_value());
        const auto& dbg = *rep.debug;
        for (const auto& b : dbg.blocks) {
            if (b.c_factor.cols() > 0) {
                REQUIRE(b.t_prime_factor.cols() > 0);
                Matrix c = b.c_factor * b.c_factor.adjoint();
                Matrix tp = b.t_prime_factor * b.t_prime_factor.adjoint();
                CHECK((tp * c - c).cwiseAbs().maxCoeff() < 1e-9);
            }
            if (b.t_prime_factor.cols() > 0) {
                CHECK(b.classical_typical);
                Matrix tp = b.t_prime_factor * b.t_prime_factor.adjoint();
                CHECK((dbg.t_q * tp - tp).cwiseAbs().maxCoeff() < 1e-9);
            }
        }
    }

    SUBCASE("codeword measure obeys the realized window") {
        std::mt19937 gen(157);
        auto ch = testutil::random_memoryless(2, 2, gen);
        const int n = 3;
        auto rep = conditional_typicality_pipeline(uniform_iid(2), ch, n, 0.3);
        const double lo = std::exp2(-n * (rep.s_conditional_rate + rep.epsilon_realized));
        const double hi = std::exp2(-n * (rep.s_conditional_rate - rep.epsilon_realized));
        for (const auto& e : rep.typical) {
            CHECK(static_cast<double>(e.c_trace()) <= 1.0 / lo + 1e-6);
            Matrix d = block_output_state(ch, e.x).matrix();
            for (long col = 0; col < e.c_factor.cols(); ++col) {
                Matrix v = e.c_factor.col(col);
                double w = (v.adjoint() * d * v)(0, 0).real();
                CHECK(w >= lo * (1.0 - 1e-9));
                CHECK(w <= hi * (1.0 + 1e-9));
            }
        }
    }
}

TEST_CASE("covering exponents of product spectra approach the entropy rate") {
    // Memoryless fixture shared with the end-to-end sweeps: two mixed
    // non-commuting qubit signals whose fair-coin average is diag(0.65, 0.35).
    Matrix d0(2, 2), d1(2, 2);
    d0 << 0.65, 0.3, 0.3, 0.35;
    d1 << 0.65, -0.3, -0.3, 0.35;
    auto spec = eigh(Matrix(0.5 * (d0 + d1)));
    std::vector<double> site;
    for (int i = 0; i < 2; ++i) site.push_back(spec.eigenvalues(i));
    double s = 0.0;
    for (double v : site) s -= v * std::log2(v);
    CHECK(s == doctest::Approx(0.9340680553754911).epsilon(1e-12));

    double prev = 1e100;
    for (int n : {4, 6, 8, 10, 12}) {
        auto ws = iid_product_spectrum(site, n);
        double gap = std::abs(dimension_covering_exponent(ws, 0.1) / n - s);
        CHECK(gap <= prev + 1e-12);
        prev = gap;
    }
    CHECK(prev <= 0.2);
}
