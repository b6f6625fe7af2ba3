#pragma once

#include "cqlab/joint_state.hpp"
#include "cqlab/operators.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cqlab {

inline constexpr double kDefaultTypicalityEps = 0.25;

enum class SpectrumSource { Joint, OutputMarginal, InputClassical };

// One eigenvalue's contribution to a block-diagonal spectrum. For joint
// sources the value is p(x) * lambda_j(D_x); classical sources carry p(x)
// itself with a single index per block.
struct BlockSpectrumEntry {
    double value = 0.0;
    long block_id = 0;
    int eigenvector_index = 0;
};

// Spectrum of a classically indexed state, kept block by block so that
// selections stay compatible with the classical register.
class BlockSpectrumView {
  public:
    BlockSpectrumView(SpectrumSource source, std::vector<std::vector<BlockSpectrumEntry>> blocks);

    SpectrumSource source() const { return source_; }
    const std::vector<std::vector<BlockSpectrumEntry>>& blocks() const { return blocks_; }
    std::vector<double> values() const;

  private:
    SpectrumSource source_;
    std::vector<std::vector<BlockSpectrumEntry>> blocks_;
};

BlockSpectrumView joint_spectrum_view(const JointBlockState& j);

// Eigenvectors whose eigenvalue lies strictly inside (2^{-n(s+eps)}, 2^{-n(s-eps)}).
// Boundary values are excluded, which keeps selections deterministic.
ProjectionOperator entropy_typical_projection(const Spectrum& spectrum, int n, double s,
                                              double eps);

struct BlockSelection {
    long block_id = 0;
    std::vector<int> eigenvector_indices;
};

std::vector<BlockSelection> entropy_typical_selection(const BlockSpectrumView& view, int n,
                                                      double s, double eps);

// Spectrum with multiplicities, for product states whose eigenvalues repeat
// far too often to enumerate one by one.
struct WeightedSpectrum {
    struct Atom {
        double value = 0.0;
        double multiplicity = 0.0;  // integral, kept as double for large counts
    };
    std::vector<Atom> atoms;

    double total_mass() const;
    double total_count() const;
};

// n-fold product of a site-level value list: atoms grouped by composition,
// multiplicities multinomial.
WeightedSpectrum iid_product_spectrum(const std::vector<double>& site_values, int n);

// log2 of the smallest number of largest eigenvalues whose mass reaches
// 1 - eps. The greedy count equals the minimum over all eigenprojections.
double dimension_covering_exponent(const RealVector& eigenvalues, double eps);
double dimension_covering_exponent(const Spectrum& spectrum, double eps);
double dimension_covering_exponent(const BlockSpectrumView& view, double eps);
double dimension_covering_exponent(const WeightedSpectrum& spectrum, double eps);

// Entropies of the two pinched corners q d q and (1-q) d (1-q), each taken
// subnormalized, plus the unpinched entropy. The pinched total is trapped in
// [S(d), S(d) + 1]; a violation beyond 1e-9 throws.
struct PinchedEntropyReport {
    double s_pinched_in = 0.0;
    double s_pinched_out = 0.0;
    double s_original = 0.0;

    double pinched_total() const { return s_pinched_in + s_pinched_out; }
};

PinchedEntropyReport pinched_entropy(const ProjectionOperator& q, const DensityOperator& d);

// Sub-projection of q spanned by the eigenvectors of q d q whose eigenvalue
// lies strictly inside the window; empty window gives the zero projection.
ProjectionOperator restricted_typical(const ProjectionOperator& q, const DensityOperator& d,
                                      int n, double s, double eps);

// One classically indexed codeword candidate surviving the pipeline.
struct TypicalEntry {
    Sequence x;
    double p = 0.0;          // p^n(x)
    Matrix c_factor;         // isometry F with c_x = F F*; zero columns = zero projection
    double success = 0.0;    // W^n(x, c_x)

    long c_trace() const { return c_factor.cols(); }
    ProjectionOperator projection() const;
};

// Per-block snapshot of the pipeline stages, for invariant checks at small n.
struct BlockCapture {
    Sequence x;
    double p = 0.0;
    bool classical_typical = false;
    Matrix t_block_factor;   // selected joint-typical eigenvectors of D_x
    Matrix t_prime_factor;   // range of t_q (t_x block) t_q
    Matrix c_factor;
    double success = 0.0;
};

struct PipelineDebug {
    double joint_lo = 0.0, joint_hi = 0.0;          // window on p(x) lambda
    double classical_lo = 0.0, classical_hi = 0.0;  // window on p(x)
    double output_lo = 0.0, output_hi = 0.0;        // window on marginal eigenvalues
    Matrix t_q;                                     // output-typical projection
    std::vector<BlockCapture> blocks;               // every supported sequence
};

struct TypicalityReport {
    int n = 0;
    double epsilon = 0.0;
    // Realized window of the per-codeword bounds: joint and classical windows
    // both use epsilon, so conditional eigenvalues obey exponent s_cond +- 2 eps.
    double epsilon_realized = 0.0;

    // Finite-n per-site rates measured from the built state.
    double s_input_rate = 0.0;
    double s_output_rate = 0.0;
    double s_joint_rate = 0.0;
    double s_conditional_rate = 0.0;

    std::vector<TypicalEntry> typical;  // T_n in lexicographic order
    double eta_prime = 0.0;             // 1 - mass after the restricted stage
    double delta_n = 0.0;               // max over T_n of 1 - success
    double eta = 0.0;                   // 1 - mass of the selected projection
    double p_typical_mass = 0.0;        // p^n(T_n)
    long support_size = 0;
    std::string diagnostic;             // nonempty when T_n came out empty

    std::optional<PipelineDebug> debug;
};

TypicalityReport conditional_typicality_pipeline(const InputProcess& p, const CqBlockChannel& ch,
                                                 int n, double eps = kDefaultTypicalityEps,
                                                 bool capture_intermediates = false,
                                                 long work_cap = kDefaultJointWorkCap);

}  // namespace cqlab
