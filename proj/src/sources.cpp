#include "cqlab/sources.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace cqlab {

namespace {

constexpr double kProbTol = 1e-12;

void check_probability_vector(const std::vector<double>& p, const char* who) {
    double sum = 0.0;
    for (double v : p) {
        if (v < -kProbTol) throw ArgumentError(std::string(who) + ": negative probability");
        sum += v;
    }
    if (std::abs(sum - 1.0) > kProbTol)
        throw ArgumentError(std::string(who) + ": probabilities sum to " + std::to_string(sum));
}

// Stationary law of the context chain: rows of `flat` are contexts, columns
// successor contexts. Eigenvector route first, power iteration as fallback.
std::optional<Eigen::VectorXd> stationary_of(const Eigen::MatrixXd& flat) {
    const auto dim = flat.rows();
    // The eigenvalue-1 kernel dimension counts recurrent classes; with more
    // than one the stationary law is ambiguous and the caller has to pick.
    Eigen::FullPivLU<Eigen::MatrixXd> lu(flat.transpose() -
                                         Eigen::MatrixXd::Identity(dim, dim));
    if (dim - lu.rank() > 1) return std::nullopt;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(flat.transpose());
    if (solver.info() == Eigen::Success) {
        for (Eigen::Index i = 0; i < dim; ++i) {
            if (std::abs(solver.eigenvalues()[i] - 1.0) > 1e-8) continue;
            Eigen::VectorXcd v = solver.eigenvectors().col(i);
            if (v.imag().cwiseAbs().maxCoeff() > 1e-9) continue;
            Eigen::VectorXd re = v.real();
            if (re.sum() < 0) re = -re;
            if (re.minCoeff() < -1e-9) continue;
            re = re.cwiseMax(0.0);
            re /= re.sum();
            if ((re.transpose() * flat - re.transpose()).cwiseAbs().maxCoeff() < 1e-10)
                return re;
        }
    }
    Eigen::VectorXd pi = Eigen::VectorXd::Constant(dim, 1.0 / static_cast<double>(dim));
    for (int it = 0; it < 100000; ++it) {
        Eigen::VectorXd next = flat.transpose() * pi;
        next /= next.sum();
        if ((next - pi).cwiseAbs().maxCoeff() < 1e-14) {
            pi = next;
            break;
        }
        pi = next;
    }
    if ((pi.transpose() * flat - pi.transpose()).cwiseAbs().maxCoeff() < 1e-10) return pi;
    return std::nullopt;
}

// Context chain over A^order flattened to first order: from context
// (a_1..a_k) the successor on symbol a is (a_2..a_k, a).
Eigen::MatrixXd flatten_context_chain(const Eigen::MatrixXd& transition, int alphabet, int order) {
    const long contexts = checked_power(alphabet, order);
    Eigen::MatrixXd flat = Eigen::MatrixXd::Zero(contexts, contexts);
    for (long c = 0; c < contexts; ++c) {
        const long tail = (order == 1) ? 0 : c % checked_power(alphabet, order - 1);
        for (int a = 0; a < alphabet; ++a) flat(c, tail * alphabet + a) += transition(c, a);
    }
    return flat;
}

// Marginal of a coordinate range [from, to) of a block distribution.
std::vector<double> range_marginal(const std::vector<double>& block, int alphabet, int t,
                                   int from, int to) {
    const long out_size = checked_power(alphabet, to - from);
    std::vector<double> out(out_size, 0.0);
    const long total = checked_power(alphabet, t);
    for (long idx = 0; idx < total; ++idx) {
        const Sequence x = index_to_sequence(idx, alphabet, t);
        const Sequence sub(x.begin() + from, x.begin() + to);
        out[sequence_index(sub, alphabet)] += block[idx];
    }
    return out;
}

}  // namespace

// ------------- alphabet and indexing -------------

Alphabet Alphabet::of_size(int k) {
    Alphabet a;
    a.size = k;
    for (int i = 0; i < k; ++i) a.labels.push_back(std::to_string(i));
    a.validate();
    return a;
}

void Alphabet::validate() const {
    if (size < 1) throw ArgumentError("Alphabet: size must be >= 1");
    if (static_cast<int>(labels.size()) != size)
        throw ArgumentError("Alphabet: label count does not match size");
    std::set<std::string> seen(labels.begin(), labels.end());
    if (static_cast<int>(seen.size()) != size) throw ArgumentError("Alphabet: labels not distinct");
}

long checked_power(int base, int exponent, long cap) {
    if (base < 1 || exponent < 0) throw ArgumentError("checked_power: bad base or exponent");
    long r = 1;
    for (int i = 0; i < exponent; ++i) {
        if (r > cap / base)
            throw ResourceError("checked_power: " + std::to_string(base) + "^" +
                                std::to_string(exponent) + " exceeds cap " + std::to_string(cap));
        r *= base;
    }
    return r;
}

long sequence_index(const Sequence& x, int base) {
    long idx = 0;
    for (int s : x) {
        if (s < 0 || s >= base) throw ArgumentError("sequence_index: symbol out of range");
        idx = idx * base + s;
    }
    return idx;
}

Sequence index_to_sequence(long index, int base, int n) {
    Sequence x(n);
    for (int i = n - 1; i >= 0; --i) {
        x[i] = static_cast<int>(index % base);
        index /= base;
    }
    return x;
}

double BlockDistribution::entropy_bits() const {
    double h = 0.0;
    for (double v : probs)
        if (v > 0.0) h -= v * std::log2(v);
    return h;
}

BlockDistribution BlockDistribution::marginalize_front() const {
    BlockDistribution out{alphabet_size, n - 1, std::vector<double>(probs.size() / alphabet_size, 0.0)};
    const long tail = static_cast<long>(out.probs.size());
    for (long idx = 0; idx < static_cast<long>(probs.size()); ++idx) out.probs[idx % tail] += probs[idx];
    return out;
}

BlockDistribution BlockDistribution::marginalize_back() const {
    BlockDistribution out{alphabet_size, n - 1, std::vector<double>(probs.size() / alphabet_size, 0.0)};
    for (long idx = 0; idx < static_cast<long>(probs.size()); ++idx) out.probs[idx / alphabet_size] += probs[idx];
    return out;
}

// ------------- process constructors -------------

InputProcess InputProcess::iid(Alphabet a, std::vector<double> p) {
    a.validate();
    if (static_cast<int>(p.size()) != a.size)
        throw ArgumentError("InputProcess::iid: distribution size mismatch");
    check_probability_vector(p, "InputProcess::iid");
    InputProcess out;
    out.kind_ = ProcessKind::Iid;
    out.alphabet_ = std::move(a);
    out.site_dist_ = std::move(p);
    return out;
}

InputProcess InputProcess::markov(Alphabet a, int order, Eigen::MatrixXd transition,
                                  std::optional<Eigen::VectorXd> stationary) {
    a.validate();
    if (order < 1) throw ArgumentError("InputProcess::markov: order must be >= 1");
    const long contexts = checked_power(a.size, order);
    if (transition.rows() != contexts || transition.cols() != a.size)
        throw ArgumentError("InputProcess::markov: transition must be |A|^order x |A|");
    for (long c = 0; c < contexts; ++c) {
        std::vector<double> row(transition.row(c).begin(), transition.row(c).end());
        check_probability_vector(row, "InputProcess::markov transition row");
    }
    const Eigen::MatrixXd flat = flatten_context_chain(transition, a.size, order);
    Eigen::VectorXd pi;
    if (stationary) {
        pi = *stationary;
        if (pi.size() != contexts)
            throw ArgumentError("InputProcess::markov: stationary vector has wrong size");
        std::vector<double> as_vec(pi.begin(), pi.end());
        check_probability_vector(as_vec, "InputProcess::markov stationary");
        if ((pi.transpose() * flat - pi.transpose()).cwiseAbs().maxCoeff() > 1e-10)
            throw ArgumentError("InputProcess::markov: supplied vector is not stationary");
    } else {
        auto computed = stationary_of(flat);
        if (!computed)
            throw ArgumentError(
                "InputProcess::markov: stationary law not unique or not found; supply one");
        pi = *computed;
    }
    InputProcess out;
    out.kind_ = ProcessKind::Markov;
    out.alphabet_ = std::move(a);
    out.order_ = order;
    out.transition_ = std::move(transition);
    out.stationary_ = std::move(pi);
    return out;
}

InputProcess InputProcess::periodic_product(Alphabet a, int period, std::vector<double> block_dist) {
    a.validate();
    if (period < 1) throw ArgumentError("InputProcess::periodic_product: period must be >= 1");
    if (static_cast<long>(block_dist.size()) != checked_power(a.size, period))
        throw ArgumentError("InputProcess::periodic_product: block distribution size mismatch");
    check_probability_vector(block_dist, "InputProcess::periodic_product");
    InputProcess out;
    out.kind_ = ProcessKind::PeriodicProduct;
    out.alphabet_ = std::move(a);
    out.period_ = period;
    out.block_dist_ = std::move(block_dist);
    return out;
}

const std::vector<double>& InputProcess::site_dist() const {
    if (kind_ != ProcessKind::Iid) throw UnsupportedError("site_dist: not an iid process");
    return site_dist_;
}

int InputProcess::order() const {
    if (kind_ != ProcessKind::Markov) throw UnsupportedError("order: not a markov process");
    return order_;
}

const Eigen::MatrixXd& InputProcess::transition() const {
    if (kind_ != ProcessKind::Markov) throw UnsupportedError("transition: not a markov process");
    return transition_;
}

const Eigen::VectorXd& InputProcess::stationary() const {
    if (kind_ != ProcessKind::Markov) throw UnsupportedError("stationary: not a markov process");
    return stationary_;
}

int InputProcess::period() const {
    if (kind_ != ProcessKind::PeriodicProduct)
        throw UnsupportedError("period: not a periodic product process");
    return period_;
}

const std::vector<double>& InputProcess::block_dist() const {
    if (kind_ != ProcessKind::PeriodicProduct)
        throw UnsupportedError("block_dist: not a periodic product process");
    return block_dist_;
}

// ------------- block marginals -------------

namespace {

BlockDistribution iid_marginal(const InputProcess& p, int n, long cap) {
    const int A = p.alphabet().size;
    const long size = checked_power(A, n, cap);
    BlockDistribution out{A, n, std::vector<double>(size)};
    for (long idx = 0; idx < size; ++idx) {
        double prob = 1.0;
        long rest = idx;
        for (int i = 0; i < n; ++i) {
            prob *= p.site_dist()[rest % A];
            rest /= A;
        }
        out.probs[idx] = prob;
    }
    return out;
}

BlockDistribution markov_marginal(const InputProcess& p, int n, long cap) {
    const int A = p.alphabet().size;
    const int k = p.order();
    const long size = checked_power(A, n, cap);
    BlockDistribution out{A, n, std::vector<double>(size, 0.0)};
    if (n <= k) {
        // Prefix marginal of the stationary context law.
        const long contexts = checked_power(A, k);
        for (long c = 0; c < contexts; ++c) {
            const long prefix = c / checked_power(A, k - n);
            out.probs[prefix] += p.stationary()[c];
        }
        return out;
    }
    const long context_size = checked_power(A, k);
    for (long idx = 0; idx < size; ++idx) {
        const Sequence x = index_to_sequence(idx, A, n);
        long context = sequence_index(Sequence(x.begin(), x.begin() + k), A);
        double prob = p.stationary()[context];
        for (int i = k; i < n && prob > 0.0; ++i) {
            prob *= p.transition()(context, x[i]);
            context = (context % (context_size / A)) * A + x[i];
        }
        out.probs[idx] = prob;
    }
    return out;
}

// Phase-shifted marginal of the block-aligned product measure: the window
// [1+phase, n+phase] decomposes into a suffix of one block, full blocks, and
// a prefix of a final block.
BlockDistribution periodic_marginal(const InputProcess& p, int n, int phase, long cap) {
    const int A = p.alphabet().size;
    const int t = p.period();
    const long size = checked_power(A, n, cap);
    // Segment seq: (offset in block, length) pairs covering the window.
    std::vector<std::pair<int, int>> segments;
    int pos = 0, offset = phase % t;
    while (pos < n) {
        const int len = std::min(t - offset, n - pos);
        segments.emplace_back(offset, len);
        pos += len;
        offset = 0;
    }
    std::vector<std::vector<double>> tables;
    tables.reserve(segments.size());
    for (auto [from, len] : segments)
        tables.push_back(range_marginal(p.block_dist(), A, t, from, from + len));
    BlockDistribution out{A, n, std::vector<double>(size)};
    for (long idx = 0; idx < size; ++idx) {
        const Sequence x = index_to_sequence(idx, A, n);
        double prob = 1.0;
        int at = 0;
        for (size_t s = 0; s < segments.size() && prob > 0.0; ++s) {
            const int len = segments[s].second;
            const Sequence sub(x.begin() + at, x.begin() + at + len);
            prob *= tables[s][sequence_index(sub, A)];
            at += len;
        }
        out.probs[idx] = prob;
    }
    return out;
}

}  // namespace

BlockDistribution block_marginal(const InputProcess& p, int n, long cap) {
    if (n < 1) throw ArgumentError("block_marginal: n must be >= 1");
    switch (p.kind()) {
        case ProcessKind::Iid: return iid_marginal(p, n, cap);
        case ProcessKind::Markov: return markov_marginal(p, n, cap);
        case ProcessKind::PeriodicProduct: return periodic_marginal(p, n, 0, cap);
    }
    throw ArgumentError("block_marginal: unknown kind");
}

BlockDistribution block_marginal_from(const InputProcess& p, int start, int n, long cap) {
    if (n < 1) throw ArgumentError("block_marginal_from: n must be >= 1");
    if (p.kind() != ProcessKind::PeriodicProduct) return block_marginal(p, n, cap);
    const int t = p.period();
    const int phase = ((start % t) + t) % t;
    return periodic_marginal(p, n, phase, cap);
}

double entropy_rate(const InputProcess& p) {
    switch (p.kind()) {
        case ProcessKind::Iid: {
            double h = 0.0;
            for (double v : p.site_dist())
                if (v > 0.0) h -= v * std::log2(v);
            return h;
        }
        case ProcessKind::Markov: {
            double h = 0.0;
            for (Eigen::Index c = 0; c < p.stationary().size(); ++c) {
                double row = 0.0;
                for (Eigen::Index a = 0; a < p.transition().cols(); ++a) {
                    const double q = p.transition()(c, a);
                    if (q > 0.0) row -= q * std::log2(q);
                }
                h += p.stationary()[c] * row;
            }
            return h;
        }
        case ProcessKind::PeriodicProduct: {
            double h = 0.0;
            for (double v : p.block_dist())
                if (v > 0.0) h -= v * std::log2(v);
            return h / p.period();
        }
    }
    throw ArgumentError("entropy_rate: unknown kind");
}

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& chain) {
    if (chain.rows() != chain.cols() || chain.rows() == 0)
        throw ArgumentError("stationary_distribution: chain must be square");
    for (Eigen::Index r = 0; r < chain.rows(); ++r) {
        std::vector<double> row(chain.row(r).begin(), chain.row(r).end());
        check_probability_vector(row, "stationary_distribution row");
    }
    auto pi = stationary_of(chain);
    if (!pi)
        throw ArgumentError("stationary_distribution: no unique stationary law; supply one");
    return *pi;
}

// ------------- shift average -------------

ShiftAveragedProcess::ShiftAveragedProcess(InputProcess periodic) : base_(std::move(periodic)) {
    if (base_.kind() != ProcessKind::PeriodicProduct)
        throw ArgumentError("ShiftAveragedProcess: input must be a periodic product process");
}

BlockDistribution ShiftAveragedProcess::block_marginal(int n, long cap) const {
    const int t = base_.period();
    BlockDistribution avg = periodic_marginal(base_, n, 0, cap);
    for (int phase = 1; phase < t; ++phase) {
        const BlockDistribution shifted = periodic_marginal(base_, n, phase, cap);
        for (size_t i = 0; i < avg.probs.size(); ++i) avg.probs[i] += shifted.probs[i];
    }
    for (double& v : avg.probs) v /= t;
    return avg;
}

ShiftAveragedProcess shift_average(const InputProcess& p) { return ShiftAveragedProcess(p); }

}  // namespace cqlab
