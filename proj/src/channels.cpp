#include "cqlab/channels.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

namespace cqlab {

namespace {

constexpr double kKrausTol = 1e-10;
constexpr double kStochasticTol = 1e-12;

void check_row_stochastic(const Eigen::MatrixXd& m, const char* who) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        double sum = 0.0;
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (m(r, c) < -kStochasticTol)
                throw ArgumentError(std::string(who) + ": negative transition probability");
            sum += m(r, c);
        }
        if (std::abs(sum - 1.0) > 1e-10)
            throw ArgumentError(std::string(who) + ": row " + std::to_string(r) +
                                " sums to " + std::to_string(sum));
    }
}

// Half trace norm of a hermitian difference; internal fast path that skips
// the DensityOperator wrappers.
double half_trace_norm(const Matrix& delta) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(delta, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw NumericError("half_trace_norm: eigensolver failed");
    return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

}  // namespace

// ------------- CPTP maps -------------

CPTPMap::CPTPMap(std::vector<Matrix> kraus) : kraus_(std::move(kraus)) {
    if (kraus_.empty()) throw ArgumentError("CPTPMap: empty Kraus list");
    const auto rows = kraus_[0].rows();
    const auto cols = kraus_[0].cols();
    if (rows == 0 || cols == 0) throw ArgumentError("CPTPMap: empty Kraus operator");
    Matrix sum = Matrix::Zero(cols, cols);
    for (const Matrix& k : kraus_) {
        if (k.rows() != rows || k.cols() != cols)
            throw ArgumentError("CPTPMap: inconsistent Kraus shapes");
        sum += k.adjoint() * k;
    }
    const double defect = (sum - Matrix::Identity(cols, cols)).cwiseAbs().maxCoeff();
    if (defect > kKrausTol)
        throw ArgumentError("CPTPMap: sum K*K deviates from identity by " +
                            std::to_string(defect));
}

CPTPMap CPTPMap::identity(int dim) { return CPTPMap({Matrix::Identity(dim, dim)}); }

CPTPMap CPTPMap::unitary(const Matrix& u) { return CPTPMap({u}); }

Matrix CPTPMap::apply(const Matrix& rho) const {
    Matrix out = Matrix::Zero(output_dim(), output_dim());
    for (const Matrix& k : kraus_) out += k * rho * k.adjoint();
    return out;
}

// ------------- noise description -------------

MarkovNoise MarkovNoise::make(Eigen::MatrixXd transition, std::vector<CPTPMap> maps,
                              std::optional<Eigen::VectorXd> stationary) {
    if (maps.empty()) throw ArgumentError("MarkovNoise: need at least one map");
    const int I = static_cast<int>(maps.size());
    if (transition.rows() != I || transition.cols() != I)
        throw ArgumentError("MarkovNoise: transition must be |I| x |I|");
    check_row_stochastic(transition, "MarkovNoise");
    for (const CPTPMap& m : maps)
        if (m.input_dim() != maps[0].input_dim() || m.output_dim() != maps[0].output_dim())
            throw ArgumentError("MarkovNoise: maps must share input and output dims");
    MarkovNoise out;
    if (stationary) {
        if (stationary->size() != I)
            throw ArgumentError("MarkovNoise: stationary vector has wrong size");
        if ((stationary->transpose() * transition - stationary->transpose())
                .cwiseAbs()
                .maxCoeff() > 1e-10)
            throw ArgumentError("MarkovNoise: supplied vector is not stationary");
        out.stationary = *stationary;
    } else {
        out.stationary = stationary_distribution(transition);
    }
    out.transition = std::move(transition);
    out.maps = std::move(maps);
    return out;
}

// ------------- channel constructors -------------

CqBlockChannel CqBlockChannel::memoryless(Alphabet a, std::vector<DensityOperator> signals) {
    a.validate();
    if (static_cast<int>(signals.size()) != a.size)
        throw ArgumentError("CqBlockChannel::memoryless: one signal per letter required");
    for (const DensityOperator& d : signals)
        if (d.dim() != signals[0].dim())
            throw ArgumentError("CqBlockChannel::memoryless: signal dims differ");
    CqBlockChannel ch;
    ch.kind_ = ChannelKind::Memoryless;
    ch.alphabet_ = std::move(a);
    ch.site_dim_ = signals[0].dim();
    ch.signals_ = std::move(signals);
    return ch;
}

CqBlockChannel CqBlockChannel::classical(Alphabet a, const Eigen::MatrixXd& stochastic) {
    a.validate();
    if (stochastic.rows() != a.size)
        throw ArgumentError("CqBlockChannel::classical: one row per letter required");
    check_row_stochastic(stochastic, "CqBlockChannel::classical");
    std::vector<DensityOperator> signals;
    signals.reserve(a.size);
    for (int r = 0; r < a.size; ++r) {
        Matrix diag = Matrix::Zero(stochastic.cols(), stochastic.cols());
        for (Eigen::Index c = 0; c < stochastic.cols(); ++c) diag(c, c) = stochastic(r, c);
        signals.emplace_back(diag);
    }
    CqBlockChannel ch = memoryless(std::move(a), std::move(signals));
    ch.kind_ = ChannelKind::Classical;
    return ch;
}

CqBlockChannel CqBlockChannel::markov_noise(Alphabet a, MarkovNoise noise,
                                            std::vector<DensityOperator> signals) {
    a.validate();
    if (static_cast<int>(signals.size()) != a.size)
        throw ArgumentError("CqBlockChannel::markov_noise: one signal per letter required");
    for (const DensityOperator& d : signals)
        if (d.dim() != noise.maps[0].input_dim())
            throw ArgumentError("CqBlockChannel::markov_noise: signal dim does not match maps");
    CqBlockChannel ch;
    ch.kind_ = ChannelKind::MarkovNoise;
    ch.alphabet_ = std::move(a);
    ch.site_dim_ = noise.maps[0].output_dim();
    ch.signals_ = std::move(signals);
    ch.mapped_.resize(noise.size());
    for (int y = 0; y < noise.size(); ++y) {
        ch.mapped_[y].reserve(ch.signals_.size());
        for (const DensityOperator& d : ch.signals_)
            ch.mapped_[y].push_back(noise.maps[y].apply(d.matrix()));
    }
    ch.noise_ = std::move(noise);
    return ch;
}

CqBlockChannel CqBlockChannel::finite_memory(Alphabet a, MarkovNoise noise, int order,
                                             std::vector<DensityOperator> window_signals) {
    a.validate();
    if (order < 0) throw ArgumentError("CqBlockChannel::finite_memory: order must be >= 0");
    const long windows = checked_power(a.size, order + 1);
    if (static_cast<long>(window_signals.size()) != windows)
        throw ArgumentError("CqBlockChannel::finite_memory: need |A|^(order+1) window signals");
    for (const DensityOperator& d : window_signals)
        if (d.dim() != noise.maps[0].input_dim())
            throw ArgumentError("CqBlockChannel::finite_memory: signal dim does not match maps");
    CqBlockChannel ch;
    ch.kind_ = ChannelKind::FiniteMemory;
    ch.alphabet_ = std::move(a);
    ch.site_dim_ = noise.maps[0].output_dim();
    ch.memory_order_ = order;
    ch.signals_ = std::move(window_signals);
    ch.mapped_.resize(noise.size());
    for (int y = 0; y < noise.size(); ++y) {
        ch.mapped_[y].reserve(ch.signals_.size());
        for (const DensityOperator& d : ch.signals_)
            ch.mapped_[y].push_back(noise.maps[y].apply(d.matrix()));
    }
    ch.noise_ = std::move(noise);
    return ch;
}

const MarkovNoise& CqBlockChannel::noise() const {
    if (!noise_) throw UnsupportedError("noise: channel has no noise chain");
    return *noise_;
}

// ------------- block outputs -------------

namespace {

void check_symbols(const CqBlockChannel& ch, const Sequence& x) {
    for (int s : x)
        if (s < 0 || s >= ch.alphabet().size)
            throw ArgumentError("block_output_state: symbol out of alphabet range");
}

// Index of the signal feeding site j of the output block (j is 0-based over
// output sites; x includes the context prefix for finite_memory kinds).
long site_signal_index(const CqBlockChannel& ch, const Sequence& x, int j) {
    if (ch.kind() != ChannelKind::FiniteMemory) return x[j];
    const int m = ch.memory_order();
    Sequence window(x.begin() + j, x.begin() + j + m + 1);
    return sequence_index(window, ch.alphabet().size);
}

// Transfer recursion over the hidden noise chain: after site s, phi[y] is the
// (unnormalized) output operator of sites up to s restricted to noise paths
// ending in y. Mixing the chain before the Kronecker step keeps the work at
// |I|^2 scalar-weighted sums plus |I| products per site.
Matrix markov_transfer(const CqBlockChannel& ch, const Sequence& x, int n_sites, long cap) {
    const MarkovNoise& noise = ch.noise();
    const int I = noise.size();
    checked_power(ch.site_dim(), n_sites, cap);
    std::vector<Matrix> phi(I);
    for (int y = 0; y < I; ++y)
        phi[y] = noise.stationary[y] * ch.mapped_signal(y, site_signal_index(ch, x, 0));
    for (int s = 1; s < n_sites; ++s) {
        std::vector<Matrix> next(I);
        for (int y = 0; y < I; ++y) {
            Matrix mixed = Matrix::Zero(phi[0].rows(), phi[0].cols());
            for (int yp = 0; yp < I; ++yp) mixed += noise.transition(yp, y) * phi[yp];
            next[y] = kron(mixed, ch.mapped_signal(y, site_signal_index(ch, x, s)), cap);
        }
        phi = std::move(next);
    }
    Matrix out = phi[0];
    for (int y = 1; y < I; ++y) out += phi[y];
    return out;
}

}  // namespace

DensityOperator block_output_state(const CqBlockChannel& ch, const Sequence& x, long cap) {
    check_symbols(ch, x);
    if (ch.kind() == ChannelKind::Memoryless || ch.kind() == ChannelKind::Classical) {
        if (x.empty()) throw ArgumentError("block_output_state: empty block");
        Matrix out = ch.signals()[x[0]].matrix();
        for (size_t i = 1; i < x.size(); ++i) out = kron(out, ch.signals()[x[i]].matrix(), cap);
        return DensityOperator(out);
    }
    if (ch.kind() == ChannelKind::MarkovNoise) {
        if (x.empty()) throw ArgumentError("block_output_state: empty block");
        return DensityOperator(markov_transfer(ch, x, static_cast<int>(x.size()), cap));
    }
    const int m = ch.memory_order();
    const int n_sites = static_cast<int>(x.size()) - m;
    if (n_sites < 1)
        throw ArgumentError("block_output_state: finite-memory channel needs context + block");
    return DensityOperator(markov_transfer(ch, x, n_sites, cap));
}

// ------------- quantum-channel reduction -------------

void Ensemble::validate() const {
    if (probs.size() != states.size() || states.empty())
        throw ArgumentError("Ensemble: weights and states must align and be nonempty");
    double sum = 0.0;
    for (double p : probs) {
        if (p < -1e-12) throw ArgumentError("Ensemble: negative weight");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ArgumentError("Ensemble: weights sum to " +
                                                         std::to_string(sum));
    for (const DensityOperator& d : states)
        if (d.dim() != states[0].dim()) throw ArgumentError("Ensemble: state dims differ");
}

QuantumChannelReduction from_quantum_channel(const Ensemble& ensemble, const CPTPMap& site_map) {
    ensemble.validate();
    if (site_map.input_dim() != ensemble.states[0].dim())
        throw ArgumentError("from_quantum_channel: map input dim does not match ensemble");
    Alphabet a = Alphabet::of_size(static_cast<int>(ensemble.states.size()));
    std::vector<DensityOperator> signals;
    signals.reserve(ensemble.states.size());
    for (const DensityOperator& phi : ensemble.states)
        signals.emplace_back(site_map.apply(phi.matrix()));
    CqBlockChannel ch = CqBlockChannel::memoryless(a, std::move(signals));
    InputProcess p = InputProcess::iid(std::move(a), ensemble.probs);
    return {std::move(ch), std::move(p)};
}

QuantumChannelReduction from_quantum_channel(const Ensemble& ensemble, MarkovNoise noise) {
    ensemble.validate();
    if (noise.maps[0].input_dim() != ensemble.states[0].dim())
        throw ArgumentError("from_quantum_channel: map input dim does not match ensemble");
    Alphabet a = Alphabet::of_size(static_cast<int>(ensemble.states.size()));
    CqBlockChannel ch = CqBlockChannel::markov_noise(a, std::move(noise), ensemble.states);
    InputProcess p = InputProcess::iid(std::move(a), ensemble.probs);
    return {std::move(ch), std::move(p)};
}

// ------------- mixing diagnostics -------------

namespace {

// Number of sites k with d^k = dim; rejects non-powers.
int infer_site_count(int dim, int d) {
    if (d < 2) throw ArgumentError("mixing_defect: site dim must be >= 2");
    int k = 0;
    long acc = 1;
    while (acc < dim) {
        acc *= d;
        ++k;
    }
    if (acc != dim) throw ArgumentError("mixing_defect: operator dim is not a power of site dim");
    if (k < 1) throw ArgumentError("mixing_defect: operators must cover at least one site");
    return k;
}

}  // namespace

double mixing_defect(const CqBlockChannel& ch, const Sequence& x, const HermitianOperator& b1,
                     const HermitianOperator& b2, int l) {
    if (l < 0) throw ArgumentError("mixing_defect: gap must be >= 0");
    if (b1.dim() != b2.dim()) throw ArgumentError("mixing_defect: observable dims differ");
    check_symbols(ch, x);
    const int d = ch.site_dim();
    const int k = infer_site_count(b1.dim(), d);
    const int m = ch.memory_order();
    const int span = 2 * k + l;
    if (static_cast<int>(x.size()) != span + m)
        throw ArgumentError("mixing_defect: x must carry " + std::to_string(span + m) +
                            " symbols");

    // Effective one-symbol chain for the memoryless kinds.
    const bool has_noise = ch.kind() == ChannelKind::MarkovNoise ||
                           ch.kind() == ChannelKind::FiniteMemory;
    const int I = has_noise ? ch.noise().size() : 1;
    const long paths = checked_power(I, k, 1L << 20);

    auto site_state = [&](int y, int site) -> const Matrix& {
        // `site` is 0-based within the 2k+l window.
        if (has_noise) return ch.mapped_signal(y, site_signal_index(ch, x, site));
        return ch.signals()[x[site]].matrix();
    };

    Eigen::MatrixXd q_power;  // Q^(l+1)
    Eigen::VectorXd q0;
    if (has_noise) {
        q_power = Eigen::MatrixXd::Identity(I, I);
        for (int i = 0; i <= l; ++i) q_power = q_power * ch.noise().transition;
        q0 = ch.noise().stationary;
    } else {
        q_power = Eigen::MatrixXd::Ones(1, 1);
        q0 = Eigen::VectorXd::Ones(1);
    }

    // A[i] aggregates weight * tr(M b1) over front paths ending in noise state
    // i; B[j] the same for back paths starting in j (without entry law).
    Eigen::VectorXd A = Eigen::VectorXd::Zero(I), B = Eigen::VectorXd::Zero(I);
    for (long path = 0; path < paths; ++path) {
        const Sequence ys = index_to_sequence(path, I, k);
        double wa = q0[ys[0]], wb = 1.0;
        Matrix ma = site_state(ys[0], 0);
        Matrix mb = site_state(ys[0], k + l);
        for (int i = 1; i < k; ++i) {
            const double step = has_noise ? ch.noise().transition(ys[i - 1], ys[i]) : 1.0;
            wa *= step;
            wb *= step;
            ma = kron(ma, site_state(ys[i], i));
            mb = kron(mb, site_state(ys[i], k + l + i));
        }
        A[ys[k - 1]] += wa * (ma * b1.matrix()).trace().real();
        B[ys[0]] += wb * (mb * b2.matrix()).trace().real();
    }
    const double joint = A.transpose() * q_power * B;
    const double w1 = A.sum();
    const double w2 = q0.transpose() * B;
    return std::abs(joint - w1 * w2);
}

std::vector<double> memory_decay_profile(const CqBlockChannel& ch, int n, int window) {
    if (ch.kind() != ChannelKind::FiniteMemory)
        throw UnsupportedError("memory_decay_profile: channel has no finite-memory structure");
    if (n < 1 || window < 0) throw ArgumentError("memory_decay_profile: bad n or window");
    const int A = ch.alphabet().size;
    const int m = ch.memory_order();
    const long contexts = checked_power(A, m, 1 << 12);
    const long blocks = checked_power(A, n, 1 << 12);

    // dist(c1, c2) = max over blocks of the output variational distance.
    Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(contexts, contexts);
    for (long bx = 0; bx < blocks; ++bx) {
        const Sequence block = index_to_sequence(bx, A, n);
        std::vector<Matrix> outs(contexts);
        for (long c = 0; c < contexts; ++c) {
            Sequence full = index_to_sequence(c, A, m);
            full.insert(full.end(), block.begin(), block.end());
            outs[c] = block_output_state(ch, full).matrix();
        }
        for (long c1 = 0; c1 < contexts; ++c1)
            for (long c2 = c1 + 1; c2 < contexts; ++c2)
                dist(c1, c2) = std::max(dist(c1, c2), half_trace_norm(outs[c1] - outs[c2]));
    }

    std::vector<double> profile(window + 1, 0.0);
    for (long c1 = 0; c1 < contexts; ++c1) {
        const Sequence s1 = index_to_sequence(c1, A, m);
        for (long c2 = c1 + 1; c2 < contexts; ++c2) {
            const Sequence s2 = index_to_sequence(c2, A, m);
            int agree = 0;  // length of the common suffix
            while (agree < m && s1[m - 1 - agree] == s2[m - 1 - agree]) ++agree;
            // The pair contributes to every w it satisfies: w <= agree.
            for (int w = 0; w <= std::min(window, agree); ++w)
                profile[w] = std::max(profile[w], dist(c1, c2));
        }
    }
    return profile;
}

}  // namespace cqlab
