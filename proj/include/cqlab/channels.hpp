#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cqlab/operators.hpp"
#include "cqlab/sources.hpp"

namespace cqlab {

// Trace-preserving completely positive map in the Schrödinger picture,
// stored through its Kraus operators. Rectangular Kraus matrices are allowed
// (rows = output dim, cols = input dim).
class CPTPMap {
  public:
    explicit CPTPMap(std::vector<Matrix> kraus);

    static CPTPMap identity(int dim);
    // Conjugation by a single unitary.
    static CPTPMap unitary(const Matrix& u);

    int input_dim() const { return static_cast<int>(kraus_[0].cols()); }
    int output_dim() const { return static_cast<int>(kraus_[0].rows()); }
    const std::vector<Matrix>& kraus() const { return kraus_; }

    Matrix apply(const Matrix& rho) const;

  private:
    std::vector<Matrix> kraus_;
};

// Hidden stationary noise chain together with the per-noise-symbol maps it
// selects. The stationary law is computed from the transition matrix when not
// supplied.
struct MarkovNoise {
    Eigen::MatrixXd transition;  // |I| x |I|, row stochastic
    Eigen::VectorXd stationary;  // law on I
    std::vector<CPTPMap> maps;   // one per noise symbol

    static MarkovNoise make(Eigen::MatrixXd transition, std::vector<CPTPMap> maps,
                            std::optional<Eigen::VectorXd> stationary = std::nullopt);
    int size() const { return static_cast<int>(maps.size()); }
};

enum class ChannelKind { Memoryless, MarkovNoise, FiniteMemory, Classical };

// Block-evaluated cq channel: x^n -> density operator of dim d^n. The
// memoryless/markov_noise/classical kinds are input-memoryless and causal;
// the finite_memory kind feeds the noise maps signal states selected by a
// sliding window over the last (order+1) input symbols, so its n-block output
// is defined given the `order` preceding symbols.
class CqBlockChannel {
  public:
    static CqBlockChannel memoryless(Alphabet a, std::vector<DensityOperator> signals);
    // Stochastic matrix (|A| rows, d columns) embedded as diagonal signal states.
    static CqBlockChannel classical(Alphabet a, const Eigen::MatrixXd& stochastic);
    static CqBlockChannel markov_noise(Alphabet a, MarkovNoise noise,
                                       std::vector<DensityOperator> signals);
    // window_signals are indexed lexicographically by windows in A^(order+1)
    // (oldest symbol most significant). order = 0 degenerates to markov_noise.
    static CqBlockChannel finite_memory(Alphabet a, MarkovNoise noise, int order,
                                        std::vector<DensityOperator> window_signals);

    ChannelKind kind() const { return kind_; }
    const Alphabet& alphabet() const { return alphabet_; }
    int site_dim() const { return site_dim_; }
    // Input-memory order: 0 for the IMC kinds.
    int memory_order() const { return memory_order_; }
    bool is_imc() const { return kind_ != ChannelKind::FiniteMemory; }

    const std::vector<DensityOperator>& signals() const { return signals_; }
    const MarkovNoise& noise() const;
    // Output state of noise map y applied to the signal selected by `index`
    // (a letter for IMC kinds, a window rank for finite_memory).
    const Matrix& mapped_signal(int y, long index) const { return mapped_[y][index]; }

  private:
    CqBlockChannel() = default;

    ChannelKind kind_ = ChannelKind::Memoryless;
    Alphabet alphabet_;
    int site_dim_ = 0;
    int memory_order_ = 0;
    std::vector<DensityOperator> signals_;           // memoryless/classical, per letter
    std::optional<MarkovNoise> noise_;               // markov_noise/finite_memory
    std::vector<std::vector<Matrix>> mapped_;        // mapped_[y][signal index]
};

// Output state for the block carried by x. For IMC kinds x is the block
// itself; for finite_memory x = context ++ block with |context| = order, and
// the returned state lives on the last |x| - order sites.
DensityOperator block_output_state(const CqBlockChannel& ch, const Sequence& x,
                                   long cap = kDefaultDimensionCap);

// Classical-input ensemble for a quantum channel: states phi_i with weights.
struct Ensemble {
    std::vector<double> probs;
    std::vector<DensityOperator> states;

    void validate() const;
};

struct QuantumChannelReduction {
    CqBlockChannel channel;
    InputProcess input;  // the ensemble weights as an iid process
};

// Reduction of a quantum channel to a cq channel: W(x, b) = phi_x(K(b)),
// i.e. signal states are pushed through the site maps. Memoryless overload
// applies one map per site; the MarkovNoise overload reproduces the
// correlated-noise construction with the ensemble states as signals.
QuantumChannelReduction from_quantum_channel(const Ensemble& ensemble, const CPTPMap& site_map);
QuantumChannelReduction from_quantum_channel(const Ensemble& ensemble, MarkovNoise noise);

// |W(x, b1 ⊗ 1^l ⊗ b2) − W(x, b1 ⊗ 1)·W(x, 1 ⊗ b2)| on the (2k+l)-block,
// where b1, b2 act on k sites each. The l identity sites are traced out
// analytically through the noise chain, so only k-site operators are formed.
// x must carry 2k+l symbols (plus the context prefix for finite_memory).
double mixing_defect(const CqBlockChannel& ch, const Sequence& x, const HermitianOperator& b1,
                     const HermitianOperator& b2, int l);

// Entry w = max over pairs of length-m contexts agreeing on their last w
// symbols (and over all n-blocks) of the variational distance of the two
// outputs. Nonincreasing in w; identically 0 from w = m on.
std::vector<double> memory_decay_profile(const CqBlockChannel& ch, int n, int window);

}  // namespace cqlab
