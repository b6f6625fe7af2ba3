#pragma once

#include "cqlab/coding.hpp"
#include "cqlab/joint_state.hpp"

#include <string>
#include <vector>

namespace cqlab {

struct CapacityResult {
    int n = 0;
    double value = 0.0;                // bits per block
    std::vector<double> optimizer;     // distribution over A^n, lexicographic
    std::string method;                // "iterative" or "grid"
    long iterations = 0;
    // Distance to the max-relative-entropy upper bound at the final iterate;
    // the true optimum lies within [value, value + gap_estimate].
    double gap_estimate = 0.0;
};

inline constexpr long kCapacityIterationCap = 10000;

// Best block Holevo information over input distributions, by multiplicative
// updates p <- p * 2^{D(D_x || D_avg)} from the uniform start. The objective
// never decreases across iterations; it stops once the gain drops below tol.
// Channels with input memory are not optimized (their block outputs depend on
// the input law through the context).
CapacityResult holevo_cn(const CqBlockChannel& ch, int n, double tol,
                         long work_cap = kDefaultJointWorkCap);

// Dense sweep over binary input weights at n=1, step-sized grid; certification
// oracle for the iterative result.
CapacityResult holevo_c1_grid(const CqBlockChannel& ch, double step = 1e-3);

struct MultiLetterPoint {
    int n = 0;
    double c_n = 0.0;
    double per_site = 0.0;
    CapacityResult detail;
};

// Per-site lower bounds (1/n) C_n for each requested block length. Doubled
// block lengths are additionally seeded with the product of the half-length
// optimizer, and the pair inequality per_site(2n) >= per_site(n) - pair_slack
// is asserted whenever both lengths were computed.
std::vector<MultiLetterPoint> multi_letter_lower_bound(const CqBlockChannel& ch,
                                                       const std::vector<int>& block_lengths,
                                                       double tol = 1e-7,
                                                       double pair_slack = 2e-4,
                                                       long work_cap = kDefaultJointWorkCap);

// 1 - (C + 1/n)/(C + eps), clamped into [0, 1): the average-error floor forced
// on any code of rate C + eps.
double weak_converse_floor(double c, int n, double eps);

struct MeasuredInfoReport {
    Eigen::MatrixXd k;          // M x (M or M+1) rows tr(D_{u_i} b_j), row stochastic
    bool completed = false;     // true when the completing operator was appended
    double mutual_info = 0.0;   // I(uniform, K) in bits
    double chi = 0.0;           // Holevo information of the uniform codeword ensemble
    double margin = 0.0;        // chi - mutual_info, nonnegative up to 1e-9
};

// Transition matrix of the measurement channel and its mutual information
// under uniform codeword choice; the completing operator 1 - sum b is
// appended as an extra column when the decoders do not already resolve the
// identity. Violation of chi >= I - 1e-9 throws.
MeasuredInfoReport measured_mutual_info(const Code& code, const BlockOutputMap& w);

struct PeriodicRatePoint {
    int n = 0;
    double product_rate = 0.0;    // chi_n / n under the periodic product law
    double shift_avg_rate = 0.0;  // chi_n / n under its shift average
};

// Finite-n per-site Holevo rates of a periodic product input and of its
// stationary shift average, for channels without input memory. Asserts the
// finite-n chain shift_avg_rate >= (complete blocks / n) * block chi / t.
std::vector<PeriodicRatePoint> periodic_product_rate(const std::vector<double>& block_dist,
                                                     const CqBlockChannel& ch, int n_max,
                                                     long work_cap = kDefaultJointWorkCap);

}  // namespace cqlab
