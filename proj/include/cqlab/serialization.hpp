#pragma once

#include "cqlab/capacity.hpp"
#include "cqlab/channels.hpp"
#include "cqlab/coding.hpp"
#include "cqlab/joint_state.hpp"
#include "cqlab/sources.hpp"
#include "cqlab/typicality.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cqlab {

using Json = nlohmann::json;

// ------------- matrices -------------

// Row-major nested arrays of [re, im] pairs.
Json matrix_to_json(const Matrix& m);
// Parse errors mention `pointer` so callers can locate the offending field.
Matrix matrix_from_json(const Json& j, const std::string& pointer);

// ------------- process and channel specs -------------

// {"kind":"iid","p":[...]}
// {"kind":"markov","order":1,"transition":[[...]],"stationary":[...]}
// {"kind":"periodic_product","period":2,"block_dist":[...]}
InputProcess process_from_json(const Json& j, const std::string& pointer = "/process");
Json process_to_json(const InputProcess& p);

// {"kind":"memoryless","signals":{"0":matrix,...}}
// {"kind":"classical","rows":[[...]]}
// {"kind":"markov_noise","noise_symbols":2,"transition":[[...]],
//  "kraus":{"0":[matrix,...],...},"signals":{"0":matrix,...},"stationary":[...]}
// {"kind":"finite_memory", ... as markov_noise, plus "order":m and "alphabet":k;
//  signals keyed by window rank in A^(order+1)}
CqBlockChannel channel_from_json(const Json& j, const std::string& pointer = "/channel");
Json channel_to_json(const CqBlockChannel& ch);

// ------------- experiment configs -------------

enum class ExperimentKind { Capacity, Typicality, Code, Converse, Mixing, Aep };

std::string kind_name(ExperimentKind k);

struct ExperimentParams {
    // Block lengths, from "n_values" or the inclusive range "n_min".."n_max".
    std::vector<int> n_values = {1, 2, 3, 4};
    double eps = kDefaultTypicalityEps;  // window half-width; rate excess for converse runs
    double lambda = 0.1;                 // admission threshold for code construction
    double tol = 1e-7;                   // optimizer stopping increment
    int mixing_k = 1;                    // sites covered by each end operator
    int mixing_l_min = 1;
    int mixing_l_max = 8;
    int mixing_symbol = 0;               // constant input symbol for defect rows
    unsigned seed = 0;
    int threads = 1;
    std::string format = "csv";          // stdout summary format
    long work_cap = kDefaultJointWorkCap;
};

struct ExperimentConfig {
    int schema = 1;
    ExperimentKind kind = ExperimentKind::Capacity;
    std::optional<CqBlockChannel> channel;
    std::optional<InputProcess> process;
    ExperimentParams params;
    std::string out_dir = "out";
    std::string hash_hex;  // FNV-1a of the compact canonical dump
};

ExperimentConfig config_from_json(const Json& j);
ExperimentConfig load_config_file(const std::string& path);

// ------------- tabular output -------------

// Shortest decimal representation that parses back to the same double.
std::string format_real(double v);

// Header plus rows, comma separated, LF line endings. Cells are expected to
// be plain tokens; no quoting is performed.
class CsvTable {
  public:
    explicit CsvTable(std::vector<std::string> header);
    void add_row(std::vector<std::string> cells);
    const std::vector<std::string>& header() const { return header_; }
    long rows() const { return static_cast<long>(rows_.size()); }
    std::string str() const;

  private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

// ------------- module records -------------

Json entropy_record(const RatePoint& pt);
Json rate_sequence_record(const RateSequence& seq);
Json typicality_record(const TypicalityReport& rep);
Json code_to_json(const Code& code);
CsvTable code_summary_table();
void add_code_summary_row(CsvTable& table, const Code& code, const ErrorReport& err);
CsvTable capacity_table(const std::vector<MultiLetterPoint>& points);
Json capacity_record(const CapacityResult& res, bool include_optimizer = false);

// ------------- hashing -------------

std::uint64_t fnv1a64(const std::string& bytes);
// 16 hex digits of the FNV-1a hash of the compact dump (keys sorted).
std::string canonical_hash_hex(const Json& j);

}  // namespace cqlab
