#include "cqlab/typicality.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace cqlab {

namespace {

RealVector eigenvalues_only(const Matrix& hermitian) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw NumericError("eigenvalues_only: eigensolver failed");
    return solver.eigenvalues().reverse();
}

struct Window {
    double lo = 0.0, hi = 0.0;
    bool contains(double v) const { return lo < v && v < hi; }
};

Window entropy_window(int n, double s, double eps) {
    return {std::exp2(-n * (s + eps)), std::exp2(-n * (s - eps))};
}

}  // namespace

BlockSpectrumView::BlockSpectrumView(SpectrumSource source,
                                     std::vector<std::vector<BlockSpectrumEntry>> blocks)
    : source_(source), blocks_(std::move(blocks)) {
    double total = 0.0;
    for (const auto& block : blocks_)
        for (const BlockSpectrumEntry& e : block) {
            if (e.value < kEigenvalueFloor)
                throw ArgumentError("BlockSpectrumView: negative contribution");
            total += e.value;
        }
    if (std::abs(total - 1.0) > 1e-9)
        throw ArgumentError("BlockSpectrumView: contributions sum to " + std::to_string(total));
}

std::vector<double> BlockSpectrumView::values() const {
    std::vector<double> out;
    for (const auto& block : blocks_)
        for (const BlockSpectrumEntry& e : block) out.push_back(e.value);
    return out;
}

BlockSpectrumView joint_spectrum_view(const JointBlockState& j) {
    std::vector<std::vector<BlockSpectrumEntry>> blocks;
    blocks.reserve(j.blocks().size());
    for (const JointBlock& b : j.blocks()) {
        const RealVector vals = eigenvalues_only(b.state.matrix());
        const long id = sequence_index(b.x, j.alphabet().size);
        std::vector<BlockSpectrumEntry> entries;
        entries.reserve(vals.size());
        for (int i = 0; i < vals.size(); ++i)
            entries.push_back({b.p * std::max(vals[i], 0.0), id, i});
        blocks.push_back(std::move(entries));
    }
    return BlockSpectrumView(SpectrumSource::Joint, std::move(blocks));
}

ProjectionOperator entropy_typical_projection(const Spectrum& spectrum, int n, double s,
                                              double eps) {
    if (eps <= 0.0) throw ArgumentError("entropy_typical_projection: eps must be positive");
    const Window w = entropy_window(n, s, eps);
    std::vector<int> sel;
    for (int i = 0; i < spectrum.eigenvalues.size(); ++i)
        if (w.contains(spectrum.eigenvalues[i])) sel.push_back(i);
    const int dim = static_cast<int>(spectrum.eigenvectors.rows());
    if (sel.empty()) return ProjectionOperator::zero(dim);
    Matrix cols(dim, sel.size());
    for (size_t k = 0; k < sel.size(); ++k) cols.col(k) = spectrum.eigenvectors.col(sel[k]);
    return ProjectionOperator::from_isometry(cols);
}

std::vector<BlockSelection> entropy_typical_selection(const BlockSpectrumView& view, int n,
                                                      double s, double eps) {
    if (eps <= 0.0) throw ArgumentError("entropy_typical_selection: eps must be positive");
    const Window w = entropy_window(n, s, eps);
    std::vector<BlockSelection> out;
    out.reserve(view.blocks().size());
    for (const auto& block : view.blocks()) {
        BlockSelection sel;
        if (!block.empty()) sel.block_id = block.front().block_id;
        for (const BlockSpectrumEntry& e : block)
            if (w.contains(e.value)) sel.eigenvector_indices.push_back(e.eigenvector_index);
        out.push_back(std::move(sel));
    }
    return out;
}

double WeightedSpectrum::total_mass() const {
    double m = 0.0;
    for (const Atom& a : atoms) m += a.value * a.multiplicity;
    return m;
}

double WeightedSpectrum::total_count() const {
    double c = 0.0;
    for (const Atom& a : atoms) c += a.multiplicity;
    return c;
}

WeightedSpectrum iid_product_spectrum(const std::vector<double>& site_values, int n) {
    if (site_values.empty()) throw ArgumentError("iid_product_spectrum: empty site list");
    if (n < 1) throw ArgumentError("iid_product_spectrum: n must be >= 1");
    const int B = static_cast<int>(site_values.size());
    WeightedSpectrum out;
    // Odometer over compositions (c_0..c_{B-1}) with sum n.
    std::vector<int> c(B, 0);
    c[0] = n;
    while (true) {
        double value = 1.0, mult = 1.0;
        int remaining = n;
        for (int b = 0; b < B; ++b) {
            value *= std::pow(site_values[b], c[b]);
            // Running binomial product equals the multinomial coefficient.
            for (int i = 0; i < c[b]; ++i) mult = mult * (remaining - i) / (i + 1);
            remaining -= c[b];
        }
        out.atoms.push_back({value, std::round(mult)});
        int b = 0;
        while (b < B - 1 && c[b] == 0) ++b;
        if (b == B - 1) break;
        const int head = c[b];
        c[b] = 0;
        c[b + 1] += 1;
        c[0] = head - 1;
    }
    return out;
}

double dimension_covering_exponent(const RealVector& eigenvalues, double eps) {
    if (eps <= 0.0 || eps >= 1.0)
        throw ArgumentError("dimension_covering_exponent: eps must be in (0,1)");
    std::vector<double> vals(eigenvalues.data(), eigenvalues.data() + eigenvalues.size());
    std::sort(vals.begin(), vals.end(), std::greater<>());
    const double target = 1.0 - eps;
    double acc = 0.0;
    long count = 0;
    for (double v : vals) {
        acc += std::max(v, 0.0);
        ++count;
        if (acc >= target) break;
    }
    if (count == 0) throw ArgumentError("dimension_covering_exponent: empty spectrum");
    return std::log2(static_cast<double>(count));
}

double dimension_covering_exponent(const Spectrum& spectrum, double eps) {
    return dimension_covering_exponent(spectrum.eigenvalues, eps);
}

double dimension_covering_exponent(const BlockSpectrumView& view, double eps) {
    const std::vector<double> flat = view.values();
    RealVector v(flat.size());
    for (size_t i = 0; i < flat.size(); ++i) v[i] = flat[i];
    return dimension_covering_exponent(v, eps);
}

double dimension_covering_exponent(const WeightedSpectrum& spectrum, double eps) {
    if (eps <= 0.0 || eps >= 1.0)
        throw ArgumentError("dimension_covering_exponent: eps must be in (0,1)");
    if (spectrum.atoms.empty())
        throw ArgumentError("dimension_covering_exponent: empty spectrum");
    std::vector<WeightedSpectrum::Atom> atoms = spectrum.atoms;
    std::sort(atoms.begin(), atoms.end(),
              [](const auto& a, const auto& b) { return a.value > b.value; });
    const double target = 1.0 - eps;
    double acc = 0.0, count = 0.0;
    for (const auto& [value, multiplicity] : atoms) {
        if (value <= 0.0) break;
        const double group = value * multiplicity;
        if (acc + group < target) {
            acc += group;
            count += multiplicity;
            continue;
        }
        count += std::ceil((target - acc) / value);
        return std::log2(count);
    }
    // Mass never reached the target (can only happen by rounding); use every
    // positive eigenvalue.
    return std::log2(std::max(count, 1.0));
}

PinchedEntropyReport pinched_entropy(const ProjectionOperator& q, const DensityOperator& d) {
    if (q.dim() != d.dim()) throw ArgumentError("pinched_entropy: dimension mismatch");
    const Matrix comp = Matrix::Identity(q.dim(), q.dim()) - q.matrix();
    PinchedEntropyReport r;
    r.s_pinched_in = entropy_of_weights(eigenvalues_only(q.matrix() * d.matrix() * q.matrix()));
    r.s_pinched_out = entropy_of_weights(eigenvalues_only(comp * d.matrix() * comp));
    r.s_original = von_neumann_entropy(d);
    const double total = r.pinched_total();
    if (total < r.s_original - 1e-9 || total > r.s_original + 1.0 + 1e-9)
        throw NumericError("pinched_entropy: sandwich violated: S=" +
                           std::to_string(r.s_original) + " pinched=" + std::to_string(total));
    return r;
}

ProjectionOperator restricted_typical(const ProjectionOperator& q, const DensityOperator& d,
                                      int n, double s, double eps) {
    if (q.dim() != d.dim()) throw ArgumentError("restricted_typical: dimension mismatch");
    if (eps <= 0.0) throw ArgumentError("restricted_typical: eps must be positive");
    const Spectrum spec = eigh(q.matrix() * d.matrix() * q.matrix());
    return entropy_typical_projection(spec, n, s, eps);
}

ProjectionOperator TypicalEntry::projection() const {
    if (c_factor.cols() == 0) return ProjectionOperator::zero(static_cast<int>(c_factor.rows()));
    return ProjectionOperator::from_isometry(c_factor);
}

TypicalityReport conditional_typicality_pipeline(const InputProcess& p, const CqBlockChannel& ch,
                                                 int n, double eps, bool capture_intermediates,
                                                 long work_cap) {
    if (p.alphabet().size != ch.alphabet().size)
        throw ArgumentError("conditional_typicality_pipeline: alphabets differ");
    if (n < 1) throw ArgumentError("conditional_typicality_pipeline: n must be >= 1");
    if (eps <= 0.0) throw ArgumentError("conditional_typicality_pipeline: eps must be positive");

    const int A = p.alphabet().size;
    const long dim = checked_power(ch.site_dim(), n);
    const long count = checked_power(A, n + (ch.is_imc() ? 0 : ch.memory_order()), work_cap);
    if (count > work_cap / std::max(dim * dim, 1L))
        throw ResourceError("conditional_typicality_pipeline: block budget exceeded");

    const BlockDistribution law = block_marginal(p, n);
    const InducedBlockChannel induced(p, ch, n, work_cap);
    auto output_of = [&](const Sequence& x) { return induced.output(x).matrix(); };

    // First sweep: average output, input entropy, average conditional entropy.
    Matrix avg = Matrix::Zero(dim, dim);
    double h_input = 0.0, s_cond_total = 0.0;
    std::vector<long> support;
    for (long idx = 0; idx < static_cast<long>(law.probs.size()); ++idx) {
        const double w = law.probs[idx];
        if (w <= 0.0) continue;
        support.push_back(idx);
        const Matrix d = output_of(index_to_sequence(idx, A, n));
        avg += w * d;
        h_input -= w * std::log2(w);
        s_cond_total += w * entropy_of_weights(eigenvalues_only(d));
    }

    TypicalityReport report;
    report.n = n;
    report.epsilon = eps;
    report.epsilon_realized = 2.0 * eps;
    report.support_size = static_cast<long>(support.size());
    report.s_input_rate = h_input / n;
    report.s_joint_rate = (h_input + s_cond_total) / n;
    report.s_conditional_rate = s_cond_total / n;

    const Spectrum avg_spec = eigh(avg);
    report.s_output_rate = entropy_of_weights(avg_spec.eigenvalues) / n;

    const Window w_joint = entropy_window(n, report.s_joint_rate, eps);
    const Window w_class = entropy_window(n, report.s_input_rate, eps);
    const Window w_out = entropy_window(n, report.s_output_rate, eps);

    const ProjectionOperator t_q = entropy_typical_projection(avg_spec, n, report.s_output_rate,
                                                              eps);
    if (capture_intermediates) {
        PipelineDebug dbg;
        dbg.joint_lo = w_joint.lo;
        dbg.joint_hi = w_joint.hi;
        dbg.classical_lo = w_class.lo;
        dbg.classical_hi = w_class.hi;
        dbg.output_lo = w_out.lo;
        dbg.output_hi = w_out.hi;
        dbg.t_q = t_q.matrix();
        report.debug = std::move(dbg);
    }

    // Second sweep: per-block typical selection, pinching through t_q, and the
    // restricted selection that yields c_x. Block spectra are recomputed here
    // so no per-block eigenbasis is ever stored across blocks.
    std::vector<TypicalEntry> candidates;
    double kept_mass = 0.0;
    for (long idx : support) {
        const Sequence x = index_to_sequence(idx, A, n);
        const double w = law.at(x);
        TypicalEntry entry;
        entry.x = x;
        entry.p = w;
        entry.c_factor = Matrix(dim, 0);
        BlockCapture cap;
        if (capture_intermediates) {
            cap.x = x;
            cap.p = w;
            cap.t_block_factor = Matrix(dim, 0);
            cap.t_prime_factor = Matrix(dim, 0);
            cap.c_factor = Matrix(dim, 0);
        }
        const bool classical = w_class.contains(w);
        if (capture_intermediates) cap.classical_typical = classical;
        if (classical) {
            const Matrix d = output_of(x);
            const Spectrum spec = eigh(d);
            std::vector<int> sel;
            for (int i = 0; i < spec.eigenvalues.size(); ++i)
                if (w_joint.contains(w * spec.eigenvalues[i])) sel.push_back(i);
            if (!sel.empty()) {
                Matrix v_sel(dim, sel.size());
                for (size_t k = 0; k < sel.size(); ++k)
                    v_sel.col(k) = spec.eigenvectors.col(sel[k]);
                if (capture_intermediates) cap.t_block_factor = v_sel;
                // t_q t_x t_q = (t_q V)(t_q V)*; its range carries t'.
                const Matrix m1 = t_q.matrix() * v_sel;
                const Spectrum range_spec = eigh(Matrix(m1 * m1.adjoint()));
                const double top = std::max(range_spec.eigenvalues[0], 0.0);
                int rank = 0;
                while (rank < range_spec.eigenvalues.size() &&
                       range_spec.eigenvalues[rank] > kProjectionTol * top)
                    ++rank;
                if (rank > 0 && top > 0.0) {
                    const Matrix q_basis = range_spec.eigenvectors.leftCols(rank);
                    if (capture_intermediates) cap.t_prime_factor = q_basis;
                    // Restricted stage on t' D t', carried in the range basis.
                    const Matrix small = q_basis.adjoint() * d * q_basis;
                    const Spectrum inner = eigh(Matrix(0.5 * (small + small.adjoint())));
                    std::vector<int> keep;
                    for (int i = 0; i < inner.eigenvalues.size(); ++i)
                        if (w_joint.contains(w * inner.eigenvalues[i])) keep.push_back(i);
                    if (!keep.empty()) {
                        Matrix w_sel(rank, keep.size());
                        double mass = 0.0;
                        for (size_t k = 0; k < keep.size(); ++k) {
                            w_sel.col(k) = inner.eigenvectors.col(keep[k]);
                            mass += inner.eigenvalues[keep[k]];
                        }
                        entry.c_factor = q_basis * w_sel;
                        entry.success = mass;
                    }
                }
            }
        }
        kept_mass += w * entry.success;
        if (capture_intermediates) {
            cap.c_factor = entry.c_factor;
            cap.success = entry.success;
            report.debug->blocks.push_back(std::move(cap));
        }
        if (entry.c_factor.cols() > 0) candidates.push_back(std::move(entry));
    }

    report.eta_prime = std::min(std::max(1.0 - kept_mass, 0.0), 1.0);
    const double threshold = 1.0 - std::sqrt(report.eta_prime) - 1e-12;
    double selected_mass = 0.0;
    for (TypicalEntry& entry : candidates) {
        if (entry.success < threshold) continue;
        report.delta_n = std::max(report.delta_n, 1.0 - entry.success);
        report.p_typical_mass += entry.p;
        selected_mass += entry.p * entry.success;
        report.typical.push_back(std::move(entry));
    }
    report.eta = std::min(std::max(1.0 - selected_mass, 0.0), 1.0);
    if (report.typical.empty()) {
        report.delta_n = 0.0;
        report.diagnostic = "no sequence reached the success threshold " +
                            std::to_string(threshold) + " at n=" + std::to_string(n) +
                            ", eps=" + std::to_string(eps);
    }
    return report;
}

}  // namespace cqlab
