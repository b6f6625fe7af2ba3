#include "cqlab/joint_state.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cqlab {

namespace {

// Sequences times d^2n entries must stay under the budget.
void check_work(long sequences, int site_dim, int n, long work_cap) {
    const long block_entries = checked_power(site_dim, 2 * n, work_cap);
    if (sequences > work_cap / std::max(block_entries, 1L))
        throw ResourceError("joint state: " + std::to_string(sequences) + " blocks of dim " +
                            std::to_string(site_dim) + "^" + std::to_string(n) +
                            " exceed the work budget");
}

}  // namespace

JointBlockState::JointBlockState(Alphabet alphabet, int site_dim, int n,
                                 std::vector<JointBlock> blocks)
    : alphabet_(std::move(alphabet)), site_dim_(site_dim), n_(n), blocks_(std::move(blocks)) {
    alphabet_.validate();
    if (site_dim_ < 1 || n_ < 1) throw ArgumentError("JointBlockState: bad dims");
    if (blocks_.empty()) throw ArgumentError("JointBlockState: no supported sequences");
    const long dim = checked_power(site_dim_, n_);
    double total = 0.0;
    std::vector<long> ids;
    ids.reserve(blocks_.size());
    for (const JointBlock& b : blocks_) {
        if (static_cast<int>(b.x.size()) != n_)
            throw ArgumentError("JointBlockState: sequence length mismatch");
        if (b.p <= 0.0) throw ArgumentError("JointBlockState: blocks must carry positive mass");
        if (b.state.dim() != dim) throw ArgumentError("JointBlockState: block dim mismatch");
        total += b.p;
        ids.push_back(sequence_index(b.x, alphabet_.size));
    }
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
        throw ArgumentError("JointBlockState: duplicate sequences");
    if (std::abs(total - 1.0) > 1e-10)
        throw ArgumentError("JointBlockState: block masses sum to " + std::to_string(total));
}

JointBlockState build_joint(const InputProcess& p, const CqBlockChannel& ch, int n,
                            long work_cap) {
    if (p.alphabet().size != ch.alphabet().size)
        throw ArgumentError("build_joint: process and channel alphabets differ");
    if (n < 1) throw ArgumentError("build_joint: n must be >= 1");
    const int A = p.alphabet().size;
    const int m = ch.is_imc() ? 0 : ch.memory_order();
    const long count = checked_power(A, n + m, work_cap);
    check_work(count, ch.site_dim(), n, work_cap);

    const BlockDistribution law = block_marginal(p, n);
    std::vector<JointBlock> blocks;
    if (ch.is_imc()) {
        for (long idx = 0; idx < checked_power(A, n); ++idx) {
            const double w = law.probs[idx];
            if (w <= 0.0) continue;
            Sequence x = index_to_sequence(idx, A, n);
            DensityOperator d = block_output_state(ch, x, work_cap);
            blocks.push_back({std::move(x), w, std::move(d)});
        }
    } else {
        const BlockDistribution extended = block_marginal_from(p, -m, m + n);
        const long dim = checked_power(ch.site_dim(), n);
        for (long idx = 0; idx < checked_power(A, n); ++idx) {
            const double w = law.probs[idx];
            if (w <= 0.0) continue;
            const Sequence x = index_to_sequence(idx, A, n);
            Matrix acc = Matrix::Zero(dim, dim);
            for (long c = 0; c < checked_power(A, m); ++c) {
                Sequence full = index_to_sequence(c, A, m);
                full.insert(full.end(), x.begin(), x.end());
                const double joint = extended.at(full);
                if (joint <= 0.0) continue;
                acc += (joint / w) * block_output_state(ch, full, work_cap).matrix();
            }
            blocks.push_back({x, w, DensityOperator(acc)});
        }
    }
    return JointBlockState(p.alphabet(), ch.site_dim(), n, std::move(blocks));
}

JointBlockState build_joint(const BlockDistribution& law, const CqBlockChannel& ch,
                            long work_cap) {
    if (law.alphabet_size != ch.alphabet().size)
        throw ArgumentError("build_joint: law and channel alphabets differ");
    if (law.n < 1 || static_cast<long>(law.probs.size()) != checked_power(law.alphabet_size, law.n))
        throw ArgumentError("build_joint: malformed block law");
    if (!ch.is_imc())
        throw UnsupportedError("build_joint: a bare block law fixes no context statistics "
                               "for a channel with input memory");
    const int A = law.alphabet_size;
    const int n = law.n;
    check_work(checked_power(A, n, work_cap), ch.site_dim(), n, work_cap);
    std::vector<JointBlock> blocks;
    for (long idx = 0; idx < checked_power(A, n); ++idx) {
        const double w = law.probs[idx];
        if (w <= 0.0) continue;
        Sequence x = index_to_sequence(idx, A, n);
        DensityOperator d = block_output_state(ch, x, work_cap);
        blocks.push_back({std::move(x), w, std::move(d)});
    }
    return JointBlockState(ch.alphabet(), ch.site_dim(), n, std::move(blocks));
}

EntropyTriple entropies(const JointBlockState& j) {
    const long dim = checked_power(j.site_dim(), j.n());
    Matrix avg = Matrix::Zero(dim, dim);
    double s_input = 0.0, s_conditional = 0.0;
    for (const JointBlock& b : j.blocks()) {
        s_input -= b.p * std::log2(b.p);
        s_conditional += b.p * von_neumann_entropy(b.state);
        avg += b.p * b.state.matrix();
    }
    EntropyTriple t;
    t.s_input = s_input;
    t.s_output = von_neumann_entropy(DensityOperator(avg));
    t.s_joint = s_input + s_conditional;
    return t;
}

double holevo_information(const EntropyTriple& t) {
    const double chi = t.s_input + t.s_output - t.s_joint;
    if (chi < -1e-9) throw NumericError("holevo_information: negative value " +
                                        std::to_string(chi));
    return std::max(chi, 0.0);
}

double holevo_information(const JointBlockState& j) {
    const double chi = holevo_information(entropies(j));
    const double cap = j.n() * std::log2(static_cast<double>(j.site_dim()));
    if (chi > cap + 1e-9)
        throw NumericError("holevo_information: value exceeds n log2 d");
    return std::min(chi, cap);
}

RateSequence information_rate_sequence(const InputProcess& p, const CqBlockChannel& ch,
                                       int n_max, long work_cap) {
    if (n_max < 1) throw ArgumentError("information_rate_sequence: n_max must be >= 1");
    RateSequence out;
    for (int n = 1; n <= n_max; ++n) {
        try {
            const JointBlockState j = build_joint(p, ch, n, work_cap);
            RatePoint pt;
            pt.n = n;
            pt.entropy = entropies(j);
            pt.chi = holevo_information(pt.entropy);
            pt.chi_per_site = pt.chi / n;
            out.points.push_back(pt);
        } catch (const ResourceError&) {
            out.truncated = true;
            break;
        }
    }
    return out;
}

InducedBlockChannel::InducedBlockChannel(InputProcess p, CqBlockChannel ch, int n, long work_cap)
    : p_(std::move(p)),
      ch_(std::move(ch)),
      n_(n),
      work_cap_(work_cap),
      block_law_(block_marginal(p_, n)),
      context_law_(ch_.is_imc() ? block_marginal(p_, n)
                                : block_marginal_from(p_, -ch_.memory_order(),
                                                      ch_.memory_order() + n)) {
    if (p_.alphabet().size != ch_.alphabet().size)
        throw ArgumentError("InducedBlockChannel: process and channel alphabets differ");
}

DensityOperator InducedBlockChannel::output(const Sequence& x) const {
    if (static_cast<int>(x.size()) != n_)
        throw ArgumentError("InducedBlockChannel: sequence length mismatch");
    const double w = block_law_.at(x);
    if (w <= 0.0) throw DomainError("InducedBlockChannel: sequence has zero probability");
    if (ch_.is_imc()) return block_output_state(ch_, x, work_cap_);
    const int A = p_.alphabet().size;
    const int m = ch_.memory_order();
    const long dim = checked_power(ch_.site_dim(), n_);
    Matrix acc = Matrix::Zero(dim, dim);
    for (long c = 0; c < checked_power(A, m); ++c) {
        Sequence full = index_to_sequence(c, A, m);
        full.insert(full.end(), x.begin(), x.end());
        const double joint = context_law_.at(full);
        if (joint <= 0.0) continue;
        acc += (joint / w) * block_output_state(ch_, full, work_cap_).matrix();
    }
    return DensityOperator(acc);
}

}  // namespace cqlab
