#include "cqlab/coding.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace cqlab {

BlockOutputMap output_map(const CqBlockChannel& ch, long cap) {
    return [&ch, cap](const Sequence& x) { return block_output_state(ch, x, cap); };
}

BlockOutputMap output_map(const InducedBlockChannel& induced) {
    return [&induced](const Sequence& x) { return induced.output(x); };
}

Code::Code(int n, int decoder_dim, std::vector<CodeEntry> entries)
    : n_(n), decoder_dim_(decoder_dim), entries_(std::move(entries)) {
    if (n_ < 1 || decoder_dim_ < 1) throw ArgumentError("Code: bad block length or dim");
    Matrix sum = Matrix::Zero(decoder_dim_, decoder_dim_);
    for (const CodeEntry& e : entries_) {
        if (static_cast<int>(e.word.size()) != n_)
            throw ArgumentError("Code: codeword length mismatch");
        if (e.decoder.dim() != decoder_dim_) throw ArgumentError("Code: decoder dim mismatch");
        Eigen::SelfAdjointEigenSolver<Matrix> solver(e.decoder.matrix(), Eigen::EigenvaluesOnly);
        if (solver.eigenvalues().minCoeff() < -1e-10)
            throw ArgumentError("Code: decoder has eigenvalue " +
                                std::to_string(solver.eigenvalues().minCoeff()));
        sum += e.decoder.matrix();
    }
    if (!entries_.empty()) {
        Eigen::SelfAdjointEigenSolver<Matrix> solver(sum, Eigen::EigenvaluesOnly);
        if (solver.eigenvalues().maxCoeff() > 1.0 + 1e-9)
            throw ArgumentError("Code: decoders sum past the identity, top eigenvalue " +
                                std::to_string(solver.eigenvalues().maxCoeff()));
    }
}

double Code::rate_per_site() const {
    if (entries_.empty()) return 0.0;
    return std::log2(static_cast<double>(entries_.size())) / n_;
}

namespace {

// Success of x against the pinched decoder candidate (1-b) c_x (1-b), where
// c_x = F F*. Returns the trace together with the pinched factor (1-b) F.
double pinched_success(const Matrix& d, const Matrix& complement, const Matrix& c_factor,
                       Matrix& pinched_factor) {
    pinched_factor = complement * c_factor;
    return ((pinched_factor.adjoint() * d * pinched_factor).trace()).real();
}

Matrix range_basis(const Matrix& psd) {
    const Spectrum s = eigh(psd);
    const double top = std::max(s.eigenvalues[0], 0.0);
    if (top <= 0.0) return Matrix(psd.rows(), 0);
    int rank = 0;
    while (rank < s.eigenvalues.size() && s.eigenvalues[rank] > kProjectionTol * top) ++rank;
    return s.eigenvectors.leftCols(rank);
}

}  // namespace

Code greedy_code(const TypicalityReport& report, const BlockOutputMap& w, double lambda,
                 CandidateOrder order, unsigned seed) {
    if (lambda <= 0.0 || lambda >= 1.0) throw ArgumentError("greedy_code: lambda not in (0,1)");
    const int n = report.n;
    if (report.typical.empty()) return Code(std::max(n, 1), 1, {});
    const long dim = report.typical.front().c_factor.rows();

    std::vector<size_t> pool(report.typical.size());
    std::iota(pool.begin(), pool.end(), size_t{0});
    if (order == CandidateOrder::ReversedLexicographic) {
        std::reverse(pool.begin(), pool.end());
    } else if (order == CandidateOrder::Shuffled) {
        std::mt19937 rng(seed);
        std::shuffle(pool.begin(), pool.end(), rng);
    }

    // Output states are fixed per candidate; cache them across sweeps.
    std::vector<Matrix> outputs(report.typical.size());
    for (size_t i : pool) outputs[i] = w(report.typical[i].x).matrix();

    std::vector<CodeEntry> entries;
    Matrix sum = Matrix::Zero(dim, dim);
    std::vector<bool> used(report.typical.size(), false);
    bool admitted = true;
    while (admitted) {
        admitted = false;
        for (size_t i : pool) {
            if (used[i]) continue;
            const TypicalEntry& cand = report.typical[i];
            const Matrix complement = Matrix::Identity(dim, dim) - sum;
            Matrix pinched;
            const double success = pinched_success(outputs[i], complement, cand.c_factor,
                                                   pinched);
            if (success < 1.0 - lambda) continue;
            const Matrix basis = range_basis(Matrix(pinched * pinched.adjoint()));
            Matrix decoder = basis.cols() > 0 ? Matrix(basis * basis.adjoint())
                                              : Matrix::Zero(dim, dim);
            entries.push_back({cand.x, HermitianOperator(decoder)});
            sum += decoder;
            used[i] = true;
            admitted = true;
            break;
        }
    }

    Code code(n, static_cast<int>(dim), std::move(entries));

    // Shadow bound from the termination argument, valid once delta_n < lambda/2.
    if (report.delta_n < lambda / 2.0) {
        const double eta = std::min(1.0 - lambda, lambda * lambda / 16.0);
        for (size_t i = 0; i < report.typical.size(); ++i) {
            const double mass = (outputs[i] * sum).trace().real();
            if (mass < eta - 1e-9)
                throw NumericError("greedy_code: shadow mass " + std::to_string(mass) +
                                   " below " + std::to_string(eta) + " for a typical sequence");
        }
    }
    return code;
}

namespace {

double direct_error(const Matrix& output, const Matrix& decoder) {
    return 1.0 - (output * decoder).trace().real();
}

}  // namespace

ErrorReport evaluate_errors(const Code& code, const CqBlockChannel& ch,
                            const std::optional<InputProcess>& context_law, long cap) {
    if (code.size() == 0) return {};
    const int d = ch.site_dim();
    // Decoders may cover only the trailing output sites (lifted codes); embed
    // them as identity (x) b.
    long covered = 1;
    int trailing = 0;
    while (covered < code.decoder_dim()) {
        covered *= d;
        ++trailing;
    }
    if (covered != code.decoder_dim())
        throw ArgumentError("evaluate_errors: decoder dim is not a power of site dim");
    if (trailing > code.n()) throw ArgumentError("evaluate_errors: decoder exceeds the block");
    const long full = checked_power(d, code.n(), cap);
    const long leading = full / code.decoder_dim();

    auto embedded = [&](const HermitianOperator& b) {
        if (leading == 1) return b.matrix();
        return kron(Matrix::Identity(leading, leading), b.matrix(), cap);
    };

    double max_err = 0.0, sum_err = 0.0;
    if (ch.is_imc()) {
        for (const CodeEntry& e : code.entries()) {
            const double err = direct_error(block_output_state(ch, e.word, cap).matrix(),
                                            embedded(e.decoder));
            max_err = std::max(max_err, err);
            sum_err += err;
        }
        return {max_err, sum_err / code.size()};
    }

    if (context_law) {
        const InducedBlockChannel induced(*context_law, ch, code.n(), cap);
        for (const CodeEntry& e : code.entries()) {
            const double err = direct_error(induced.output(e.word).matrix(),
                                            embedded(e.decoder));
            max_err = std::max(max_err, err);
            sum_err += err;
        }
        return {max_err, sum_err / code.size()};
    }

    const int m = ch.memory_order();
    const long contexts = checked_power(ch.alphabet().size, m, 1 << 12);
    for (const CodeEntry& e : code.entries()) {
        double worst = 0.0;
        const Matrix b = embedded(e.decoder);
        for (long c = 0; c < contexts; ++c) {
            Sequence full_seq = index_to_sequence(c, ch.alphabet().size, m);
            full_seq.insert(full_seq.end(), e.word.begin(), e.word.end());
            worst = std::max(worst,
                             direct_error(block_output_state(ch, full_seq, cap).matrix(), b));
        }
        max_err = std::max(max_err, worst);
        sum_err += worst;
    }
    return {max_err, sum_err / code.size()};
}

Code lift_code_to_memory(const Code& induced_code, const CqBlockChannel& ch, double lambda,
                         long cap) {
    if (lambda <= 0.0 || lambda >= 1.0)
        throw ArgumentError("lift_code_to_memory: lambda not in (0,1)");
    if (ch.is_imc() || ch.memory_order() == 0) return induced_code;
    if (checked_power(ch.site_dim(), induced_code.n()) != induced_code.decoder_dim())
        throw ArgumentError("lift_code_to_memory: code decoders must cover the full block");
    const int m = ch.memory_order();
    const int A = ch.alphabet().size;
    const long contexts = checked_power(A, m, 1 << 12);
    const double guaranteed = 1.0 - std::sqrt(lambda);

    std::vector<CodeEntry> lifted;
    lifted.reserve(induced_code.size());
    for (const CodeEntry& e : induced_code.entries()) {
        double best = -1.0;
        Sequence best_word;
        for (long c = 0; c < contexts; ++c) {
            Sequence word = index_to_sequence(c, A, m);
            word.insert(word.end(), e.word.begin(), e.word.end());
            const double success =
                (block_output_state(ch, word, cap).matrix() * e.decoder.matrix())
                    .trace()
                    .real();
            if (success > best) {
                best = success;
                best_word = std::move(word);
            }
        }
        if (best < guaranteed - 1e-9)
            throw NumericError("lift_code_to_memory: best context reaches only " +
                               std::to_string(best) +
                               "; the induced success premise does not hold");
        lifted.push_back({std::move(best_word), e.decoder});
    }
    return Code(induced_code.n() + m, induced_code.decoder_dim(), std::move(lifted));
}

}  // namespace cqlab
