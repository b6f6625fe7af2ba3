#include "cqlab/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>

namespace cqlab {

namespace {

// Floor for eigenvalues inside log2. Chosen so that exp2 of the resulting
// relative entropies (at most ~997 bits) still fits in a double.
constexpr double kLogFloor = 1e-300;

// tr(rho log2 sigma), with sigma supplied by its eigensystem.
double trace_log2(const Matrix& rho, const Spectrum& sigma) {
    const Matrix rotated = sigma.eigenvectors.adjoint() * rho * sigma.eigenvectors;
    double acc = 0.0;
    for (int i = 0; i < sigma.dim(); ++i)
        acc += rotated(i, i).real() * std::log2(std::max(sigma.eigenvalues(i), kLogFloor));
    return acc;
}

struct BaOutcome {
    std::vector<double> p;
    double value = 0.0;
    long iterations = 0;
    double gap = 0.0;
};

// Multiplicative updates p <- p * 2^{D(D_x || D_avg)}. The objective is the
// weighted relative-entropy sum, which equals the Holevo information of the
// current iterate; max_x D(D_x || D_avg) is an upper bound on the optimum, so
// the reported gap brackets the true value.
BaOutcome ba_optimize(const std::vector<Matrix>& states, std::vector<double> p, double tol) {
    const long count = static_cast<long>(states.size());
    std::vector<double> neg_entropy(count);
    for (long i = 0; i < count; ++i)
        neg_entropy[i] = -von_neumann_entropy(DensityOperator(states[i]));

    const long dim = states[0].rows();
    BaOutcome out;
    double prev = -std::numeric_limits<double>::infinity();
    for (long it = 0; it <= kCapacityIterationCap; ++it) {
        Matrix avg = Matrix::Zero(dim, dim);
        for (long i = 0; i < count; ++i)
            if (p[i] > 0.0) avg += p[i] * states[i];
        const Spectrum spec = eigh(avg);

        std::vector<double> r(count);
        double chi = 0.0, top = 0.0;
        for (long i = 0; i < count; ++i) {
            r[i] = neg_entropy[i] - trace_log2(states[i], spec);
            chi += p[i] * r[i];
            top = std::max(top, r[i]);
        }
        if (chi < prev - 1e-9)
            throw NumericError("ba_optimize: objective decreased from " + std::to_string(prev) +
                               " to " + std::to_string(chi));
        const bool converged = it > 0 && chi - prev < tol;
        prev = chi;

        out.p = p;
        out.value = chi;
        out.iterations = it;
        out.gap = std::max(top - chi, 0.0);
        if (converged || it == kCapacityIterationCap) break;

        double z = 0.0;
        for (long i = 0; i < count; ++i) {
            p[i] *= std::exp2(r[i]);
            z += p[i];
        }
        for (long i = 0; i < count; ++i) p[i] /= z;
    }
    return out;
}

std::vector<Matrix> block_states(const CqBlockChannel& ch, int n, long work_cap) {
    const int a = ch.alphabet().size;
    const long count = checked_power(a, n, work_cap);
    const long entries = checked_power(ch.site_dim(), 2 * n, work_cap);
    if (count > work_cap / std::max(entries, 1L))
        throw ResourceError("holevo_cn: " + std::to_string(count) + " block outputs of dim " +
                            std::to_string(ch.site_dim()) + "^" + std::to_string(n) +
                            " exceed the work budget");
    std::vector<Matrix> states;
    states.reserve(count);
    for (long idx = 0; idx < count; ++idx)
        states.push_back(block_output_state(ch, index_to_sequence(idx, a, n), work_cap).matrix());
    return states;
}

CapacityResult package(const BaOutcome& ba, const CqBlockChannel& ch, int n) {
    CapacityResult res;
    res.n = n;
    res.value = ba.value;
    res.optimizer = ba.p;
    res.method = "iterative";
    res.iterations = ba.iterations;
    res.gap_estimate = ba.gap;
    const double cap_bits = n * std::log2(static_cast<double>(
        std::min(ch.alphabet().size, ch.site_dim())));
    if (res.value > cap_bits + 1e-9)
        throw NumericError("holevo_cn: value " + std::to_string(res.value) +
                           " exceeds n log2 min(|A|, d) = " + std::to_string(cap_bits));
    if (res.value < -1e-9)
        throw NumericError("holevo_cn: value " + std::to_string(res.value) + " is negative");
    res.value = std::clamp(res.value, 0.0, cap_bits);
    return res;
}

}  // namespace

CapacityResult holevo_cn(const CqBlockChannel& ch, int n, double tol, long work_cap) {
    if (n < 1) throw ArgumentError("holevo_cn: n must be >= 1");
    if (tol <= 0.0) throw ArgumentError("holevo_cn: tol must be positive");
    if (!ch.is_imc())
        throw UnsupportedError("holevo_cn: block outputs of a channel with input memory "
                               "depend on the input law through the context");
    const std::vector<Matrix> states = block_states(ch, n, work_cap);
    const std::vector<double> uniform(states.size(), 1.0 / static_cast<double>(states.size()));
    return package(ba_optimize(states, uniform, tol), ch, n);
}

CapacityResult holevo_c1_grid(const CqBlockChannel& ch, double step) {
    if (!ch.is_imc())
        throw UnsupportedError("holevo_c1_grid: channels with input memory are not supported");
    if (ch.alphabet().size != 2)
        throw ArgumentError("holevo_c1_grid: binary input alphabets only");
    if (step <= 0.0 || step > 0.5) throw ArgumentError("holevo_c1_grid: step must be in (0, 0.5]");

    const Matrix d0 = block_output_state(ch, {0}).matrix();
    const Matrix d1 = block_output_state(ch, {1}).matrix();
    const double s0 = von_neumann_entropy(DensityOperator(d0));
    const double s1 = von_neumann_entropy(DensityOperator(d1));

    const long k_max = std::lround(std::ceil(1.0 / step));
    double best_p = 0.0, best_chi = 0.0;
    for (long k = 0; k <= k_max; ++k) {
        const double p = std::min(1.0, static_cast<double>(k) * step);
        const Matrix avg = p * d0 + (1.0 - p) * d1;
        const double chi = von_neumann_entropy(DensityOperator(avg)) - p * s0 - (1.0 - p) * s1;
        if (chi > best_chi) {
            best_chi = chi;
            best_p = p;
        }
    }

    CapacityResult res;
    res.n = 1;
    res.value = best_chi;
    res.optimizer = {best_p, 1.0 - best_p};
    res.method = "grid";
    res.iterations = k_max + 1;
    const Spectrum spec = eigh(Matrix(best_p * d0 + (1.0 - best_p) * d1));
    const double r0 = -s0 - trace_log2(d0, spec);
    const double r1 = -s1 - trace_log2(d1, spec);
    res.gap_estimate = std::max(std::max(r0, r1) - best_chi, 0.0);
    return res;
}

std::vector<MultiLetterPoint> multi_letter_lower_bound(const CqBlockChannel& ch,
                                                       const std::vector<int>& block_lengths,
                                                       double tol, double pair_slack,
                                                       long work_cap) {
    if (block_lengths.empty())
        throw ArgumentError("multi_letter_lower_bound: no block lengths given");

    std::map<int, CapacityResult> computed;
    for (int n : block_lengths) {
        if (n < 1) throw ArgumentError("multi_letter_lower_bound: block lengths must be >= 1");
        if (computed.count(n)) continue;
        CapacityResult res = holevo_cn(ch, n, tol, work_cap);
        const auto half = computed.find(n / 2);
        if (n % 2 == 0 && half != computed.end()) {
            // Seed with the product of the half-length optimizer: the doubled
            // objective is at least twice the half-length value at this start.
            const std::vector<double>& q = half->second.optimizer;
            const long half_count = static_cast<long>(q.size());
            std::vector<double> seed(half_count * half_count);
            for (long i = 0; i < half_count; ++i)
                for (long j = 0; j < half_count; ++j) seed[i * half_count + j] = q[i] * q[j];
            const std::vector<Matrix> states = block_states(ch, n, work_cap);
            CapacityResult seeded = package(ba_optimize(states, seed, tol), ch, n);
            if (seeded.value > res.value) res = std::move(seeded);
        }
        computed.emplace(n, std::move(res));
    }

    for (const auto& [n, res] : computed) {
        const auto doubled = computed.find(2 * n);
        if (doubled == computed.end()) continue;
        const double lo = res.value / n;
        const double hi = doubled->second.value / (2 * n);
        if (hi < lo - pair_slack)
            throw NumericError("multi_letter_lower_bound: per-site value dropped from " +
                               std::to_string(lo) + " at n=" + std::to_string(n) + " to " +
                               std::to_string(hi) + " at n=" + std::to_string(2 * n));
    }

    std::vector<MultiLetterPoint> out;
    std::vector<int> seen;
    for (int n : block_lengths) {
        if (std::find(seen.begin(), seen.end(), n) != seen.end()) continue;
        seen.push_back(n);
        MultiLetterPoint pt;
        pt.n = n;
        pt.detail = computed.at(n);
        pt.c_n = pt.detail.value;
        pt.per_site = pt.c_n / n;
        out.push_back(std::move(pt));
    }
    return out;
}

double weak_converse_floor(double c, int n, double eps) {
    if (c < 0.0) throw ArgumentError("weak_converse_floor: capacity must be nonnegative");
    if (n < 1) throw ArgumentError("weak_converse_floor: n must be >= 1");
    if (eps <= 0.0) throw ArgumentError("weak_converse_floor: eps must be positive");
    // The ratio is strictly positive, so the result is already below 1.
    return std::max(0.0, 1.0 - (c + 1.0 / n) / (c + eps));
}

MeasuredInfoReport measured_mutual_info(const Code& code, const BlockOutputMap& w) {
    const long m_count = static_cast<long>(code.size());
    if (m_count < 1) throw ArgumentError("measured_mutual_info: empty code");

    std::vector<DensityOperator> outs;
    outs.reserve(m_count);
    for (const CodeEntry& e : code.entries()) outs.push_back(w(e.word));
    const long out_dim = outs[0].dim();
    for (const DensityOperator& d : outs)
        if (d.dim() != out_dim)
            throw ArgumentError("measured_mutual_info: codeword outputs have mixed dimensions");

    // Decoders of a lifted code act on the trailing sites; pad with the
    // identity on the rest.
    const long b_dim = code.decoder_dim();
    if (b_dim > out_dim || out_dim % b_dim != 0)
        throw ArgumentError("measured_mutual_info: decoder dimension does not divide the output");
    const long lead = out_dim / b_dim;
    const Matrix lead_id = Matrix::Identity(lead, lead);
    std::vector<Matrix> povm;
    povm.reserve(m_count + 1);
    Matrix sum = Matrix::Zero(out_dim, out_dim);
    for (const CodeEntry& e : code.entries()) {
        Matrix b = lead == 1 ? e.decoder.matrix() : kron(lead_id, e.decoder.matrix());
        sum += b;
        povm.push_back(std::move(b));
    }
    const Matrix comp = Matrix::Identity(out_dim, out_dim) - sum;
    const Spectrum comp_spec = eigh(comp);
    const bool completed = comp_spec.eigenvalues(0) > 1e-12;
    if (completed) povm.push_back(comp);

    MeasuredInfoReport rep;
    rep.completed = completed;
    const long cols = static_cast<long>(povm.size());
    rep.k = Eigen::MatrixXd(m_count, cols);
    for (long i = 0; i < m_count; ++i) {
        double row = 0.0;
        for (long j = 0; j < cols; ++j) {
            const double v = std::max((outs[i].matrix() * povm[j]).trace().real(), 0.0);
            rep.k(i, j) = v;
            row += v;
        }
        if (std::abs(row - 1.0) > 1e-9)
            throw NumericError("measured_mutual_info: measurement row sums to " +
                               std::to_string(row));
    }

    const double inv_m = 1.0 / static_cast<double>(m_count);
    Eigen::VectorXd marginal = Eigen::VectorXd::Zero(cols);
    for (long i = 0; i < m_count; ++i) marginal += inv_m * rep.k.row(i).transpose();
    double info = 0.0;
    for (long i = 0; i < m_count; ++i)
        for (long j = 0; j < cols; ++j) {
            const double v = rep.k(i, j);
            if (v > 0.0) info += inv_m * v * std::log2(v / marginal(j));
        }
    rep.mutual_info = info;

    Matrix avg = Matrix::Zero(out_dim, out_dim);
    double s_cond = 0.0;
    for (const DensityOperator& d : outs) {
        avg += inv_m * d.matrix();
        s_cond += inv_m * von_neumann_entropy(d);
    }
    rep.chi = von_neumann_entropy(DensityOperator(avg)) - s_cond;
    rep.margin = rep.chi - rep.mutual_info;
    if (rep.margin < -1e-9)
        throw NumericError("measured_mutual_info: measured information " +
                           std::to_string(rep.mutual_info) + " exceeds the Holevo value " +
                           std::to_string(rep.chi));
    return rep;
}

std::vector<PeriodicRatePoint> periodic_product_rate(const std::vector<double>& block_dist,
                                                     const CqBlockChannel& ch, int n_max,
                                                     long work_cap) {
    if (!ch.is_imc())
        throw UnsupportedError("periodic_product_rate: channels with input memory "
                               "are not supported");
    if (n_max < 1) throw ArgumentError("periodic_product_rate: n_max must be >= 1");
    const int a = ch.alphabet().size;
    int t = 0;
    for (long k = 1, pw = a; k <= 32; ++k, pw *= a) {
        if (pw == static_cast<long>(block_dist.size())) {
            t = static_cast<int>(k);
            break;
        }
        if (pw > static_cast<long>(block_dist.size())) break;
    }
    if (t == 0)
        throw ArgumentError("periodic_product_rate: table size is not a positive power "
                            "of the alphabet size");

    const InputProcess periodic =
        InputProcess::periodic_product(ch.alphabet(), t, block_dist);
    const ShiftAveragedProcess averaged = shift_average(periodic);
    const BlockDistribution one_period{a, t, block_dist};
    const double chi_block = holevo_information(build_joint(one_period, ch, work_cap));

    std::vector<PeriodicRatePoint> out;
    for (int n = 1; n <= n_max; ++n) {
        const double chi_prod = holevo_information(build_joint(periodic, ch, n, work_cap));
        const double chi_avg =
            holevo_information(build_joint(averaged.block_marginal(n), ch, work_cap));
        // Complete periods inside a length-n window starting at phase i.
        long complete = 0;
        for (int i = 0; i < t; ++i) complete += (n + i) / t - (i + t - 1) / t;
        const double bound = static_cast<double>(complete) * chi_block / t;
        if (chi_avg < bound - 1e-9)
            throw NumericError("periodic_product_rate: shift-average information " +
                               std::to_string(chi_avg) + " fell below the complete-block bound " +
                               std::to_string(bound) + " at n=" + std::to_string(n));
        out.push_back({n, chi_prod / n, chi_avg / n});
    }
    return out;
}

}  // namespace cqlab
