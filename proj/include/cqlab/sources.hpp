#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "cqlab/errors.hpp"
#include "cqlab/operators.hpp"

namespace cqlab {

// Classical input symbols are indices into an Alphabet; sequences are little
// vectors of those indices.
using Sequence = std::vector<int>;

struct Alphabet {
    int size = 0;
    std::vector<std::string> labels;

    // Labels "0", "1", ... for quick fixtures.
    static Alphabet of_size(int k);
    void validate() const;
};

// ------------- sequence indexing -------------

// Power with the resource guard every exponential table goes through.
long checked_power(int base, int exponent, long cap = kDefaultDimensionCap);

// Lexicographic rank of a sequence (first symbol most significant).
long sequence_index(const Sequence& x, int base);
Sequence index_to_sequence(long index, int base, int n);

// Dense probability table over A^n, indexed lexicographically.
struct BlockDistribution {
    int alphabet_size = 0;
    int n = 0;
    std::vector<double> probs;

    double at(const Sequence& x) const { return probs[sequence_index(x, alphabet_size)]; }
    double entropy_bits() const;
    // Sum out the first / last coordinate.
    BlockDistribution marginalize_front() const;
    BlockDistribution marginalize_back() const;
};

// ------------- input processes -------------

enum class ProcessKind { Iid, Markov, PeriodicProduct };

// Finite description of an input law on A^Z. Markov chains are stationary by
// construction; periodic products are block-aligned at position 1 (phase 0)
// and only become stationary through shift_average below.
class InputProcess {
  public:
    static InputProcess iid(Alphabet a, std::vector<double> p);
    // transition has |A|^order rows (contexts, lexicographic) and |A| columns.
    // The stationary context law is computed from the flattened chain unless
    // supplied; reducible chains must supply it.
    static InputProcess markov(Alphabet a, int order, Eigen::MatrixXd transition,
                               std::optional<Eigen::VectorXd> stationary = std::nullopt);
    static InputProcess periodic_product(Alphabet a, int period, std::vector<double> block_dist);

    ProcessKind kind() const { return kind_; }
    const Alphabet& alphabet() const { return alphabet_; }

    const std::vector<double>& site_dist() const;        // iid
    int order() const;                                   // markov
    const Eigen::MatrixXd& transition() const;           // markov
    const Eigen::VectorXd& stationary() const;           // markov, law on A^order
    int period() const;                                  // periodic_product
    const std::vector<double>& block_dist() const;       // periodic_product

  private:
    InputProcess() = default;

    ProcessKind kind_ = ProcessKind::Iid;
    Alphabet alphabet_;
    std::vector<double> site_dist_;
    int order_ = 0;
    Eigen::MatrixXd transition_;
    Eigen::VectorXd stationary_;
    int period_ = 0;
    std::vector<double> block_dist_;
};

BlockDistribution block_marginal(const InputProcess& p, int n,
                                 long cap = kDefaultDimensionCap);

// Marginal of the n symbols starting at absolute position `start`. Stationary
// kinds ignore `start`; a periodic process keeps position 0 aligned with its
// period, so this is the marginal at phase (start mod period), which may lie
// left of the origin (negative start is allowed).
BlockDistribution block_marginal_from(const InputProcess& p, int start, int n,
                                      long cap = kDefaultDimensionCap);

double entropy_rate(const InputProcess& p);

// Stationary row vector of a row-stochastic matrix (eigenvector of the
// transpose at eigenvalue 1, power iteration as fallback). Throws
// ArgumentError when no unambiguous solution is found.
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& chain);

// Stationary block-marginal provider obtained by averaging the period phases
// of a periodic product process. Not an InputProcess: it has no finite
// transition description, only exact marginals.
class ShiftAveragedProcess {
  public:
    explicit ShiftAveragedProcess(InputProcess periodic);

    const Alphabet& alphabet() const { return base_.alphabet(); }
    int period() const { return base_.period(); }
    BlockDistribution block_marginal(int n, long cap = kDefaultDimensionCap) const;

  private:
    InputProcess base_;
};

ShiftAveragedProcess shift_average(const InputProcess& p);

}  // namespace cqlab
