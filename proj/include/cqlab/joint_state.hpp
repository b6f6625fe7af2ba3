#pragma once

#include "cqlab/channels.hpp"
#include "cqlab/operators.hpp"
#include "cqlab/sources.hpp"

#include <vector>

namespace cqlab {

// Work budget for block-wise joint constructions in matrix entries (number of
// supported sequences times d^2n). Keeps dense per-block spectra at desk scale.
inline constexpr long kDefaultJointWorkCap = 1L << 25;

struct JointBlock {
    Sequence x;
    double p = 0.0;
    DensityOperator state;
};

// Classical register tensor channel output, held block by block: the implied
// operator sum_x p(x) |x><x| (x) D_x is never formed. Blocks cover exactly the
// support of the input law, in increasing lexicographic order.
class JointBlockState {
  public:
    JointBlockState(Alphabet alphabet, int site_dim, int n, std::vector<JointBlock> blocks);

    const Alphabet& alphabet() const { return alphabet_; }
    int site_dim() const { return site_dim_; }
    int n() const { return n_; }
    const std::vector<JointBlock>& blocks() const { return blocks_; }

  private:
    Alphabet alphabet_;
    int site_dim_ = 0;
    int n_ = 0;
    std::vector<JointBlock> blocks_;
};

// All entries in bits, per block (not per site).
struct EntropyTriple {
    double s_input = 0.0;
    double s_output = 0.0;
    double s_joint = 0.0;
};

// For channels with input memory the block states are the context-averaged
// outputs, so the construction agrees with the induced block channel.
JointBlockState build_joint(const InputProcess& p, const CqBlockChannel& ch, int n,
                            long work_cap = kDefaultJointWorkCap);

// Same construction from an explicit block law (block length taken from the
// law). Only for channels without input memory: a bare n-block law carries no
// context statistics.
JointBlockState build_joint(const BlockDistribution& law, const CqBlockChannel& ch,
                            long work_cap = kDefaultJointWorkCap);

// s_input = H(p^n); s_output = S(sum p D_x); s_joint = H(p^n) + sum p S(D_x).
// Only the output marginal is ever diagonalized at full dimension.
EntropyTriple entropies(const JointBlockState& j);

double holevo_information(const EntropyTriple& t);
double holevo_information(const JointBlockState& j);

struct RatePoint {
    int n = 0;
    EntropyTriple entropy;
    double chi = 0.0;
    double chi_per_site = 0.0;
};

// Per-site Holevo rates for n = 1..n_max. When a block length exceeds the
// work budget the list stops early and `truncated` marks the cut.
struct RateSequence {
    std::vector<RatePoint> points;
    bool truncated = false;
};

RateSequence information_rate_sequence(const InputProcess& p, const CqBlockChannel& ch,
                                       int n_max, long work_cap = kDefaultJointWorkCap);

// Context-averaged block channel W'(x^n) = (1/p^n(x^n)) sum_c p(c ++ x^n) W(c ++ x^n),
// the channel the joint state induces on supported sequences. For channels
// without input memory this is exactly block_output_state.
class InducedBlockChannel {
  public:
    InducedBlockChannel(InputProcess p, CqBlockChannel ch, int n,
                        long work_cap = kDefaultJointWorkCap);

    int n() const { return n_; }
    const CqBlockChannel& channel() const { return ch_; }

    // Throws DomainError when p^n(x) = 0.
    DensityOperator output(const Sequence& x) const;

  private:
    InputProcess p_;
    CqBlockChannel ch_;
    int n_ = 0;
    long work_cap_ = kDefaultJointWorkCap;
    BlockDistribution block_law_;     // p^n
    BlockDistribution context_law_;   // p^{m+n}, ending where the block starts
};

}  // namespace cqlab
