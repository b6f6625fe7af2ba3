#include "cqlab/serialization.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <utility>

namespace cqlab {

namespace {

[[noreturn]] void fail_at(const std::string& pointer, const std::string& what) {
    throw ArgumentError("config error at " + (pointer.empty() ? std::string("/") : pointer) +
                        ": " + what);
}

const Json& member(const Json& j, const std::string& pointer, const char* name) {
    if (!j.is_object() || !j.contains(name)) fail_at(pointer + "/" + name, "missing field");
    return j.at(name);
}

long int_member(const Json& j, const std::string& pointer, const char* name) {
    const Json& v = member(j, pointer, name);
    if (!v.is_number_integer()) fail_at(pointer + "/" + name, "expected an integer");
    return v.get<long>();
}

double real_member(const Json& j, const std::string& pointer, const char* name) {
    const Json& v = member(j, pointer, name);
    if (!v.is_number()) fail_at(pointer + "/" + name, "expected a number");
    return v.get<double>();
}

std::string string_member(const Json& j, const std::string& pointer, const char* name) {
    const Json& v = member(j, pointer, name);
    if (!v.is_string()) fail_at(pointer + "/" + name, "expected a string");
    return v.get<std::string>();
}

std::vector<double> real_vector_from_json(const Json& j, const std::string& pointer) {
    if (!j.is_array() || j.empty()) fail_at(pointer, "expected a nonempty array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) fail_at(pointer + "/" + std::to_string(i), "expected a number");
        out.push_back(j[i].get<double>());
    }
    return out;
}

Eigen::MatrixXd real_matrix_from_json(const Json& j, const std::string& pointer) {
    if (!j.is_array() || j.empty()) fail_at(pointer, "expected a nonempty array of rows");
    const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
    if (cols == 0) fail_at(pointer + "/0", "expected a nonempty row");
    Eigen::MatrixXd m(static_cast<long>(j.size()), static_cast<long>(cols));
    for (std::size_t r = 0; r < j.size(); ++r) {
        if (!j[r].is_array() || j[r].size() != cols)
            fail_at(pointer + "/" + std::to_string(r), "rows must have equal length");
        for (std::size_t c = 0; c < cols; ++c) {
            if (!j[r][c].is_number())
                fail_at(pointer + "/" + std::to_string(r) + "/" + std::to_string(c),
                        "expected a number");
            m(static_cast<long>(r), static_cast<long>(c)) = j[r][c].get<double>();
        }
    }
    return m;
}

Json real_matrix_to_json(const Eigen::MatrixXd& m) {
    Json rows = Json::array();
    for (long r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (long c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

// Objects keyed "0".."k-1"; the count is the object size so gaps are loud.
std::vector<Json> indexed_members(const Json& j, const std::string& pointer) {
    if (!j.is_object() || j.empty()) fail_at(pointer, "expected an object keyed by index");
    std::vector<Json> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string key = std::to_string(i);
        if (!j.contains(key)) fail_at(pointer + "/" + key, "missing indexed field");
        out.push_back(j.at(key));
    }
    return out;
}

DensityOperator density_from_json(const Json& j, const std::string& pointer) {
    try {
        return DensityOperator(matrix_from_json(j, pointer));
    } catch (const ArgumentError&) {
        throw;
    } catch (const Error& e) {
        fail_at(pointer, e.what());
    }
}

MarkovNoise noise_from_json(const Json& j, const std::string& pointer) {
    const long symbols = int_member(j, pointer, "noise_symbols");
    if (symbols < 1) fail_at(pointer + "/noise_symbols", "must be >= 1");
    const Eigen::MatrixXd transition =
        real_matrix_from_json(member(j, pointer, "transition"), pointer + "/transition");
    if (transition.rows() != symbols || transition.cols() != symbols)
        fail_at(pointer + "/transition", "must be noise_symbols x noise_symbols");

    const Json& kraus = member(j, pointer, "kraus");
    const std::vector<Json> per_symbol = indexed_members(kraus, pointer + "/kraus");
    if (static_cast<long>(per_symbol.size()) != symbols)
        fail_at(pointer + "/kraus", "needs one entry per noise symbol");
    std::vector<CPTPMap> maps;
    maps.reserve(per_symbol.size());
    for (std::size_t y = 0; y < per_symbol.size(); ++y) {
        const std::string kp = pointer + "/kraus/" + std::to_string(y);
        if (!per_symbol[y].is_array() || per_symbol[y].empty())
            fail_at(kp, "expected a nonempty array of matrices");
        std::vector<Matrix> ops;
        ops.reserve(per_symbol[y].size());
        for (std::size_t i = 0; i < per_symbol[y].size(); ++i)
            ops.push_back(matrix_from_json(per_symbol[y][i], kp + "/" + std::to_string(i)));
        try {
            maps.push_back(CPTPMap(std::move(ops)));
        } catch (const Error& e) {
            fail_at(kp, e.what());
        }
    }

    std::optional<Eigen::VectorXd> stationary;
    if (j.contains("stationary")) {
        const std::vector<double> s =
            real_vector_from_json(j.at("stationary"), pointer + "/stationary");
        stationary =
            Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<long>(s.size())).eval();
    }
    try {
        return MarkovNoise::make(transition, std::move(maps), std::move(stationary));
    } catch (const Error& e) {
        fail_at(pointer, e.what());
    }
}

std::vector<DensityOperator> signals_from_json(const Json& j, const std::string& pointer) {
    const std::vector<Json> raw = indexed_members(member(j, pointer, "signals"),
                                                  pointer + "/signals");
    std::vector<DensityOperator> signals;
    signals.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i)
        signals.push_back(density_from_json(raw[i], pointer + "/signals/" + std::to_string(i)));
    return signals;
}

Json signals_to_json(const std::vector<DensityOperator>& signals) {
    Json obj = Json::object();
    for (std::size_t i = 0; i < signals.size(); ++i)
        obj[std::to_string(i)] = matrix_to_json(signals[i].matrix());
    return obj;
}

Json noise_to_json(const MarkovNoise& noise) {
    Json obj = Json::object();
    obj["noise_symbols"] = noise.size();
    obj["transition"] = real_matrix_to_json(noise.transition);
    Json stationary = Json::array();
    for (long i = 0; i < noise.stationary.size(); ++i) stationary.push_back(noise.stationary(i));
    obj["stationary"] = std::move(stationary);
    Json kraus = Json::object();
    for (int y = 0; y < noise.size(); ++y) {
        Json ops = Json::array();
        for (const Matrix& k : noise.maps[static_cast<std::size_t>(y)].kraus())
            ops.push_back(matrix_to_json(k));
        kraus[std::to_string(y)] = std::move(ops);
    }
    obj["kraus"] = std::move(kraus);
    return obj;
}

ExperimentKind kind_from_name(const std::string& name, const std::string& pointer) {
    if (name == "capacity") return ExperimentKind::Capacity;
    if (name == "typicality") return ExperimentKind::Typicality;
    if (name == "code") return ExperimentKind::Code;
    if (name == "converse") return ExperimentKind::Converse;
    if (name == "mixing") return ExperimentKind::Mixing;
    if (name == "aep") return ExperimentKind::Aep;
    fail_at(pointer, "unknown experiment kind '" + name + "'");
}

void reject_unknown_keys(const Json& j, const std::string& pointer,
                         const std::vector<std::string>& allowed) {
    for (const auto& [key, value] : j.items()) {
        (void)value;
        bool ok = false;
        for (const std::string& a : allowed) ok = ok || key == a;
        if (!ok) fail_at(pointer + "/" + key, "unknown field");
    }
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (long r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (long c = 0; c < m.cols(); ++c)
            row.push_back(Json::array({m(r, c).real(), m(r, c).imag()}));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const Json& j, const std::string& pointer) {
    if (!j.is_array() || j.empty()) fail_at(pointer, "expected a nonempty array of matrix rows");
    const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
    if (cols == 0) fail_at(pointer + "/0", "expected a nonempty matrix row");
    Matrix m(static_cast<long>(j.size()), static_cast<long>(cols));
    for (std::size_t r = 0; r < j.size(); ++r) {
        if (!j[r].is_array() || j[r].size() != cols)
            fail_at(pointer + "/" + std::to_string(r), "matrix rows must have equal length");
        for (std::size_t c = 0; c < cols; ++c) {
            const Json& e = j[r][c];
            if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
                fail_at(pointer + "/" + std::to_string(r) + "/" + std::to_string(c),
                        "matrix entries are [re, im] pairs");
            m(static_cast<long>(r), static_cast<long>(c)) =
                Complex(e[0].get<double>(), e[1].get<double>());
        }
    }
    return m;
}

InputProcess process_from_json(const Json& j, const std::string& pointer) {
    if (!j.is_object()) fail_at(pointer, "expected an object");
    const std::string kind = string_member(j, pointer, "kind");
    try {
        if (kind == "iid") {
            reject_unknown_keys(j, pointer, {"kind", "p"});
            std::vector<double> p = real_vector_from_json(member(j, pointer, "p"),
                                                          pointer + "/p");
            const int letters = static_cast<int>(p.size());
            return InputProcess::iid(Alphabet::of_size(letters), std::move(p));
        }
        if (kind == "markov") {
            reject_unknown_keys(j, pointer, {"kind", "order", "transition", "stationary"});
            const long order = int_member(j, pointer, "order");
            if (order < 1) fail_at(pointer + "/order", "must be >= 1");
            Eigen::MatrixXd transition = real_matrix_from_json(
                member(j, pointer, "transition"), pointer + "/transition");
            std::optional<Eigen::VectorXd> stationary;
            if (j.contains("stationary")) {
                const std::vector<double> s =
                    real_vector_from_json(j.at("stationary"), pointer + "/stationary");
                stationary = Eigen::Map<const Eigen::VectorXd>(
                                 s.data(), static_cast<long>(s.size()))
                                 .eval();
            }
            const int letters = static_cast<int>(transition.cols());
            return InputProcess::markov(Alphabet::of_size(letters), static_cast<int>(order),
                                        std::move(transition), std::move(stationary));
        }
        if (kind == "periodic_product") {
            reject_unknown_keys(j, pointer, {"kind", "period", "block_dist", "alphabet"});
            const long period = int_member(j, pointer, "period");
            if (period < 1) fail_at(pointer + "/period", "must be >= 1");
            std::vector<double> dist = real_vector_from_json(
                member(j, pointer, "block_dist"), pointer + "/block_dist");
            long a = j.contains("alphabet") ? int_member(j, pointer, "alphabet") : 0;
            if (a == 0) {
                for (long cand = 1; cand <= static_cast<long>(dist.size()); ++cand) {
                    long pw = 1;
                    for (long k = 0; k < period && pw <= static_cast<long>(dist.size()); ++k)
                        pw *= cand;
                    if (pw == static_cast<long>(dist.size())) {
                        a = cand;
                        break;
                    }
                }
                if (a == 0)
                    fail_at(pointer + "/block_dist",
                            "size is not a power of any alphabet size; set /alphabet");
            }
            return InputProcess::periodic_product(Alphabet::of_size(static_cast<int>(a)),
                                                  static_cast<int>(period), std::move(dist));
        }
    } catch (const ArgumentError& e) {
        if (std::string(e.what()).rfind("config error", 0) == 0) throw;
        fail_at(pointer, e.what());
    }
    fail_at(pointer + "/kind", "unknown process kind '" + kind + "'");
}

Json process_to_json(const InputProcess& p) {
    Json obj = Json::object();
    switch (p.kind()) {
        case ProcessKind::Iid:
            obj["kind"] = "iid";
            obj["p"] = p.site_dist();
            break;
        case ProcessKind::Markov: {
            obj["kind"] = "markov";
            obj["order"] = p.order();
            obj["transition"] = real_matrix_to_json(p.transition());
            Json stationary = Json::array();
            for (long i = 0; i < p.stationary().size(); ++i)
                stationary.push_back(p.stationary()(i));
            obj["stationary"] = std::move(stationary);
            break;
        }
        case ProcessKind::PeriodicProduct:
            obj["kind"] = "periodic_product";
            obj["period"] = p.period();
            obj["block_dist"] = p.block_dist();
            obj["alphabet"] = p.alphabet().size;
            break;
    }
    return obj;
}

CqBlockChannel channel_from_json(const Json& j, const std::string& pointer) {
    if (!j.is_object()) fail_at(pointer, "expected an object");
    const std::string kind = string_member(j, pointer, "kind");
    try {
        if (kind == "memoryless") {
            reject_unknown_keys(j, pointer, {"kind", "signals", "alphabet"});
            std::vector<DensityOperator> signals = signals_from_json(j, pointer);
            const int letters = static_cast<int>(signals.size());
            return CqBlockChannel::memoryless(Alphabet::of_size(letters), std::move(signals));
        }
        if (kind == "classical") {
            reject_unknown_keys(j, pointer, {"kind", "rows", "alphabet"});
            const Eigen::MatrixXd rows =
                real_matrix_from_json(member(j, pointer, "rows"), pointer + "/rows");
            return CqBlockChannel::classical(Alphabet::of_size(static_cast<int>(rows.rows())),
                                             rows);
        }
        if (kind == "markov_noise") {
            reject_unknown_keys(j, pointer, {"kind", "noise_symbols", "transition", "kraus",
                                             "stationary", "signals", "alphabet"});
            MarkovNoise noise = noise_from_json(j, pointer);
            std::vector<DensityOperator> signals = signals_from_json(j, pointer);
            const int letters = static_cast<int>(signals.size());
            return CqBlockChannel::markov_noise(Alphabet::of_size(letters), std::move(noise),
                                                std::move(signals));
        }
        if (kind == "finite_memory") {
            reject_unknown_keys(j, pointer, {"kind", "noise_symbols", "transition", "kraus",
                                             "stationary", "signals", "alphabet", "order"});
            const long order = int_member(j, pointer, "order");
            if (order < 0) fail_at(pointer + "/order", "must be >= 0");
            const long a = int_member(j, pointer, "alphabet");
            if (a < 1) fail_at(pointer + "/alphabet", "must be >= 1");
            MarkovNoise noise = noise_from_json(j, pointer);
            std::vector<DensityOperator> signals = signals_from_json(j, pointer);
            return CqBlockChannel::finite_memory(Alphabet::of_size(static_cast<int>(a)),
                                                 std::move(noise), static_cast<int>(order),
                                                 std::move(signals));
        }
    } catch (const ArgumentError& e) {
        if (std::string(e.what()).rfind("config error", 0) == 0) throw;
        fail_at(pointer, e.what());
    }
    fail_at(pointer + "/kind", "unknown channel kind '" + kind + "'");
}

Json channel_to_json(const CqBlockChannel& ch) {
    Json obj = Json::object();
    obj["alphabet"] = ch.alphabet().size;
    switch (ch.kind()) {
        case ChannelKind::Memoryless:
            obj["kind"] = "memoryless";
            obj["signals"] = signals_to_json(ch.signals());
            break;
        case ChannelKind::Classical: {
            obj["kind"] = "classical";
            Eigen::MatrixXd rows(ch.alphabet().size, ch.site_dim());
            for (int a = 0; a < ch.alphabet().size; ++a)
                for (int b = 0; b < ch.site_dim(); ++b)
                    rows(a, b) = ch.signals()[static_cast<std::size_t>(a)].matrix()(b, b).real();
            obj["rows"] = real_matrix_to_json(rows);
            break;
        }
        case ChannelKind::MarkovNoise:
            obj["kind"] = "markov_noise";
            obj.update(noise_to_json(ch.noise()));
            obj["signals"] = signals_to_json(ch.signals());
            break;
        case ChannelKind::FiniteMemory:
            obj["kind"] = "finite_memory";
            obj["order"] = ch.memory_order();
            obj.update(noise_to_json(ch.noise()));
            obj["signals"] = signals_to_json(ch.signals());
            break;
    }
    return obj;
}

std::string kind_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::Capacity: return "capacity";
        case ExperimentKind::Typicality: return "typicality";
        case ExperimentKind::Code: return "code";
        case ExperimentKind::Converse: return "converse";
        case ExperimentKind::Mixing: return "mixing";
        case ExperimentKind::Aep: return "aep";
    }
    return "capacity";
}

ExperimentConfig config_from_json(const Json& j) {
    if (!j.is_object()) fail_at("", "config must be a JSON object");
    reject_unknown_keys(j, "", {"schema", "kind", "channel", "process", "parameters", "out"});
    if (int_member(j, "", "schema") != 1) fail_at("/schema", "unsupported schema (expected 1)");

    ExperimentConfig cfg;
    cfg.kind = kind_from_name(string_member(j, "", "kind"), "/kind");
    cfg.channel = channel_from_json(member(j, "", "channel"), "/channel");
    if (j.contains("process")) cfg.process = process_from_json(j.at("process"), "/process");
    const bool needs_process = cfg.kind == ExperimentKind::Typicality ||
                               cfg.kind == ExperimentKind::Code ||
                               cfg.kind == ExperimentKind::Aep;
    if (needs_process && !cfg.process)
        fail_at("/process", "this experiment kind needs an input process");
    if (cfg.process && cfg.process->alphabet().size != cfg.channel->alphabet().size)
        fail_at("/process", "process and channel alphabets differ");

    if (j.contains("out")) {
        if (!j.at("out").is_string()) fail_at("/out", "expected a string");
        cfg.out_dir = j.at("out").get<std::string>();
    }

    ExperimentParams& p = cfg.params;
    if (j.contains("parameters")) {
        const Json& par = j.at("parameters");
        const std::string pp = "/parameters";
        if (!par.is_object()) fail_at(pp, "expected an object");
        reject_unknown_keys(par, pp,
                            {"n_values", "n_min", "n_max", "eps", "lambda", "tol", "mixing_k",
                             "mixing_l_min", "mixing_l_max", "mixing_symbol", "seed", "threads",
                             "format", "work_cap"});
        if (par.contains("n_values")) {
            if (par.contains("n_min") || par.contains("n_max"))
                fail_at(pp + "/n_values", "give either n_values or the n_min/n_max range");
            const Json& nv = par.at("n_values");
            if (!nv.is_array() || nv.empty()) fail_at(pp + "/n_values", "expected a nonempty array");
            p.n_values.clear();
            for (std::size_t i = 0; i < nv.size(); ++i) {
                if (!nv[i].is_number_integer() || nv[i].get<long>() < 1)
                    fail_at(pp + "/n_values/" + std::to_string(i), "expected an integer >= 1");
                p.n_values.push_back(nv[i].get<int>());
            }
        } else if (par.contains("n_min") || par.contains("n_max")) {
            const long lo = par.contains("n_min") ? int_member(par, pp, "n_min") : 1;
            const long hi = par.contains("n_max") ? int_member(par, pp, "n_max") : lo;
            if (lo < 1) fail_at(pp + "/n_min", "must be >= 1");
            if (hi < lo) fail_at(pp + "/n_max", "must be >= n_min");
            p.n_values.clear();
            for (long n = lo; n <= hi; ++n) p.n_values.push_back(static_cast<int>(n));
        }
        if (par.contains("eps")) {
            p.eps = real_member(par, pp, "eps");
            if (p.eps <= 0.0) fail_at(pp + "/eps", "must be positive");
        }
        if (par.contains("lambda")) {
            p.lambda = real_member(par, pp, "lambda");
            if (p.lambda <= 0.0 || p.lambda >= 1.0) fail_at(pp + "/lambda", "must be in (0, 1)");
        }
        if (par.contains("tol")) {
            p.tol = real_member(par, pp, "tol");
            if (p.tol <= 0.0) fail_at(pp + "/tol", "must be positive");
        }
        if (par.contains("mixing_k")) {
            p.mixing_k = static_cast<int>(int_member(par, pp, "mixing_k"));
            if (p.mixing_k < 1) fail_at(pp + "/mixing_k", "must be >= 1");
        }
        if (par.contains("mixing_l_min")) {
            p.mixing_l_min = static_cast<int>(int_member(par, pp, "mixing_l_min"));
            if (p.mixing_l_min < 0) fail_at(pp + "/mixing_l_min", "must be >= 0");
        }
        if (par.contains("mixing_l_max")) {
            p.mixing_l_max = static_cast<int>(int_member(par, pp, "mixing_l_max"));
        }
        if (p.mixing_l_max < p.mixing_l_min)
            fail_at(pp + "/mixing_l_max", "must be >= mixing_l_min");
        if (par.contains("mixing_symbol")) {
            p.mixing_symbol = static_cast<int>(int_member(par, pp, "mixing_symbol"));
            if (p.mixing_symbol < 0 || p.mixing_symbol >= cfg.channel->alphabet().size)
                fail_at(pp + "/mixing_symbol", "outside the channel alphabet");
        }
        if (par.contains("seed")) {
            const long s = int_member(par, pp, "seed");
            if (s < 0) fail_at(pp + "/seed", "must be >= 0");
            p.seed = static_cast<unsigned>(s);
        }
        if (par.contains("threads")) {
            p.threads = static_cast<int>(int_member(par, pp, "threads"));
            if (p.threads < 1) fail_at(pp + "/threads", "must be >= 1");
        }
        if (par.contains("format")) {
            p.format = string_member(par, pp, "format");
            if (p.format != "csv" && p.format != "json")
                fail_at(pp + "/format", "must be 'csv' or 'json'");
        }
        if (par.contains("work_cap")) {
            p.work_cap = int_member(par, pp, "work_cap");
            if (p.work_cap < 1) fail_at(pp + "/work_cap", "must be >= 1");
        }
    }
    cfg.hash_hex = canonical_hash_hex(j);
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open config file '" + path + "'");
    Json j;
    try {
        in >> j;
    } catch (const Json::parse_error& e) {
        throw ArgumentError("config parse error in '" + path + "': " + e.what());
    }
    return config_from_json(j);
}

std::string format_real(double v) {
    if (v == 0.0) return "0";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
    if (header_.empty()) throw ArgumentError("CsvTable: empty header");
}

void CsvTable::add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size())
        throw ArgumentError("CsvTable: row width " + std::to_string(cells.size()) +
                            " does not match the header");
    rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const {
    std::string out;
    auto join = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    join(header_);
    for (const auto& row : rows_) join(row);
    return out;
}

Json entropy_record(const RatePoint& pt) {
    Json obj = Json::object();
    obj["n"] = pt.n;
    obj["s_input"] = pt.entropy.s_input;
    obj["s_output"] = pt.entropy.s_output;
    obj["s_joint"] = pt.entropy.s_joint;
    obj["chi"] = pt.chi;
    obj["chi_per_site"] = pt.chi_per_site;
    return obj;
}

Json rate_sequence_record(const RateSequence& seq) {
    Json points = Json::array();
    for (const RatePoint& pt : seq.points) points.push_back(entropy_record(pt));
    Json obj = Json::object();
    obj["points"] = std::move(points);
    obj["truncated"] = seq.truncated;
    return obj;
}

Json typicality_record(const TypicalityReport& rep) {
    Json obj = Json::object();
    obj["n"] = rep.n;
    obj["epsilon"] = rep.epsilon;
    obj["epsilon_realized"] = rep.epsilon_realized;
    Json rates = Json::object();
    rates["s_input"] = rep.s_input_rate;
    rates["s_output"] = rep.s_output_rate;
    rates["s_joint"] = rep.s_joint_rate;
    rates["s_conditional"] = rep.s_conditional_rate;
    obj["rates"] = std::move(rates);
    obj["typical_count"] = static_cast<long>(rep.typical.size());
    obj["eta"] = rep.eta;
    obj["eta_prime"] = rep.eta_prime;
    obj["delta_n"] = rep.delta_n;
    obj["p_typical_mass"] = rep.p_typical_mass;
    obj["support_size"] = rep.support_size;
    if (!rep.diagnostic.empty()) obj["diagnostic"] = rep.diagnostic;
    Json entries = Json::array();
    for (const TypicalEntry& e : rep.typical) {
        Json entry = Json::object();
        entry["x"] = e.x;
        entry["p"] = e.p;
        entry["c_trace"] = e.c_trace();
        entry["success"] = e.success;
        entries.push_back(std::move(entry));
    }
    obj["entries"] = std::move(entries);
    return obj;
}

Json code_to_json(const Code& code) {
    Json obj = Json::object();
    obj["n"] = code.n();
    obj["decoder_dim"] = code.decoder_dim();
    obj["size"] = code.size();
    obj["rate_per_site"] = code.rate_per_site();
    Json entries = Json::array();
    for (const CodeEntry& e : code.entries()) {
        Json entry = Json::object();
        entry["word"] = e.word;
        entry["decoder"] = matrix_to_json(e.decoder.matrix());
        entries.push_back(std::move(entry));
    }
    obj["entries"] = std::move(entries);
    return obj;
}

CsvTable code_summary_table() {
    return CsvTable({"n", "M", "rate", "max_err", "avg_err"});
}

void add_code_summary_row(CsvTable& table, const Code& code, const ErrorReport& err) {
    table.add_row({std::to_string(code.n()), std::to_string(code.size()),
                   format_real(code.rate_per_site()), format_real(err.max_error),
                   format_real(err.avg_error)});
}

CsvTable capacity_table(const std::vector<MultiLetterPoint>& points) {
    CsvTable table({"n", "C_n", "C_n/n", "method", "iterations", "gap_estimate"});
    for (const MultiLetterPoint& pt : points)
        table.add_row({std::to_string(pt.n), format_real(pt.c_n), format_real(pt.per_site),
                       pt.detail.method, std::to_string(pt.detail.iterations),
                       format_real(pt.detail.gap_estimate)});
    return table;
}

Json capacity_record(const CapacityResult& res, bool include_optimizer) {
    Json obj = Json::object();
    obj["n"] = res.n;
    obj["value"] = res.value;
    obj["method"] = res.method;
    obj["iterations"] = res.iterations;
    obj["gap_estimate"] = res.gap_estimate;
    if (include_optimizer) obj["optimizer"] = res.optimizer;
    return obj;
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string canonical_hash_hex(const Json& j) {
    const std::uint64_t h = fnv1a64(j.dump());
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) out[static_cast<std::size_t>(i)] = digits[(h >> (4 * (15 - i))) & 0xf];
    return out;
}

}  // namespace cqlab
