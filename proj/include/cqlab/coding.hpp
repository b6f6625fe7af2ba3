#pragma once

#include "cqlab/joint_state.hpp"
#include "cqlab/typicality.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace cqlab {

// Block output evaluator shared by channels and induced channels, so code
// construction and evaluation never care which one they run against.
using BlockOutputMap = std::function<DensityOperator(const Sequence&)>;

BlockOutputMap output_map(const CqBlockChannel& ch, long cap = kDefaultDimensionCap);
BlockOutputMap output_map(const InducedBlockChannel& induced);

struct CodeEntry {
    Sequence word;
    HermitianOperator decoder;
};

// Codewords with a sub-POVM of decoders: sum of decoders at most identity,
// each decoder positive. Greedy-built codes carry mutually orthogonal
// projections.
class Code {
  public:
    Code(int n, int decoder_dim, std::vector<CodeEntry> entries);

    int n() const { return n_; }
    int decoder_dim() const { return decoder_dim_; }
    long size() const { return static_cast<long>(entries_.size()); }
    const std::vector<CodeEntry>& entries() const { return entries_; }

    // log2(M)/n; zero for empty codes.
    double rate_per_site() const;

  private:
    int n_ = 0;
    int decoder_dim_ = 0;
    std::vector<CodeEntry> entries_;
};

enum class CandidateOrder { Lexicographic, ReversedLexicographic, Shuffled };

// Maximal-code sweep: repeatedly admit the first sequence in candidate order
// whose pinched success tr(D_x (1-b)c_x(1-b)) reaches 1 - lambda, with decoder
// the range projection of the pinched operator. Termination means no unused
// candidate qualifies, and when delta_n < lambda/2 every typical sequence is
// checked against the shadow mass min(1-lambda, lambda^2/16).
Code greedy_code(const TypicalityReport& report, const BlockOutputMap& w, double lambda,
                 CandidateOrder order = CandidateOrder::Lexicographic, unsigned seed = 0);

struct ErrorReport {
    double max_error = 0.0;
    double avg_error = 0.0;
};

// Decoding errors 1 - tr(D_u b). Channels with input memory are evaluated at
// the worst boundary context per codeword (exhaustive over A^m); passing a
// context law evaluates against the induced channel instead.
ErrorReport evaluate_errors(const Code& code, const CqBlockChannel& ch,
                            const std::optional<InputProcess>& context_law = std::nullopt,
                            long cap = kDefaultDimensionCap);

// Turns a code for the induced channel into one for the channel itself by
// prepending, per codeword, the context with the best direct success (the
// averaging argument guarantees at least 1 - sqrt(lambda) given induced
// success 1 - lambda). Decoders act on the original n output sites.
Code lift_code_to_memory(const Code& induced_code, const CqBlockChannel& ch, double lambda,
                         long cap = kDefaultDimensionCap);

}  // namespace cqlab
