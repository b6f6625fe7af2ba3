// Batch experiment runner: one subcommand per experiment kind, file-driven
// configs, CSV tables plus a JSON report per run.

#include "cqlab/capacity.hpp"
#include "cqlab/serialization.hpp"

#include "CLI11.hpp"

#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <thread>

namespace cqlab {
namespace {

// Slots are filled independently; errors are rethrown in slot order so the
// outcome does not depend on the thread count.
void parallel_for(long count, int threads, const std::function<void(long)>& fn) {
    if (threads <= 1 || count <= 1) {
        for (long i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<long> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
    auto worker = [&] {
        for (long i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
            try {
                fn(i);
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const long width = std::min<long>(threads, count);
    pool.reserve(static_cast<std::size_t>(width));
    for (long t = 0; t < width; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError("cannot write '" + path.string() + "'");
    out << content;
}

struct RunArtifacts {
    Json report;
    CsvTable table;
    std::vector<std::pair<std::string, Json>> extra_json;  // filename -> payload
};

// Sweeps tolerate a resource overrun after the first completed point: the
// completed prefix is kept and the report is flagged partial.
template <typename Fn>
bool sweep(const std::vector<int>& n_values, int threads, Json& results, const Fn& per_n) {
    const long count = static_cast<long>(n_values.size());
    std::vector<std::optional<Json>> slots(static_cast<std::size_t>(count));
    std::vector<std::string> overruns(static_cast<std::size_t>(count));
    parallel_for(count, threads, [&](long i) {
        try {
            slots[static_cast<std::size_t>(i)] = per_n(n_values[static_cast<std::size_t>(i)]);
        } catch (const ResourceError& e) {
            overruns[static_cast<std::size_t>(i)] = e.what();
        }
    });
    bool partial = false;
    for (long i = 0; i < count; ++i) {
        if (slots[static_cast<std::size_t>(i)]) {
            if (!partial) results.push_back(*slots[static_cast<std::size_t>(i)]);
            continue;
        }
        if (results.empty()) throw ResourceError(overruns[static_cast<std::size_t>(i)]);
        partial = true;
    }
    return partial;
}

RunArtifacts run_capacity(const ExperimentConfig& cfg) {
    const ExperimentParams& p = cfg.params;
    const std::vector<MultiLetterPoint> points =
        multi_letter_lower_bound(*cfg.channel, p.n_values, p.tol, 2e-4, p.work_cap);

    RunArtifacts art{Json::object(), capacity_table(points), {}};
    Json results = Json::array();
    double best = 0.0;
    for (const MultiLetterPoint& pt : points) {
        Json rec = capacity_record(pt.detail, p.format == "json");
        rec["per_site"] = pt.per_site;
        results.push_back(std::move(rec));
        best = std::max(best, pt.per_site);
    }
    art.report["results"] = std::move(results);
    art.report["c_holevo_estimate"] = best;
    art.report["c_holevo_note"] = "asymptotic, lower bound only";
    Json optimizers = Json::array();
    for (const MultiLetterPoint& pt : points) optimizers.push_back(capacity_record(pt.detail, true));
    art.extra_json.emplace_back("optimizers.json", std::move(optimizers));
    return art;
}

RunArtifacts run_typicality(const ExperimentConfig& cfg) {
    const ExperimentParams& p = cfg.params;
    RunArtifacts art{Json::object(),
                     CsvTable({"n", "epsilon", "typical_count", "eta", "eta_prime", "delta_n",
                               "p_typical_mass", "support_size"}),
                     {}};
    Json results = Json::array();
    const bool partial = sweep(p.n_values, p.threads, results, [&](int n) {
        return typicality_record(
            conditional_typicality_pipeline(*cfg.process, *cfg.channel, n, p.eps, false,
                                            p.work_cap));
    });
    for (const Json& rec : results)
        art.table.add_row({std::to_string(rec.at("n").get<int>()), format_real(p.eps),
                           std::to_string(rec.at("typical_count").get<long>()),
                           format_real(rec.at("eta").get<double>()),
                           format_real(rec.at("eta_prime").get<double>()),
                           format_real(rec.at("delta_n").get<double>()),
                           format_real(rec.at("p_typical_mass").get<double>()),
                           std::to_string(rec.at("support_size").get<long>())});
    art.report["results"] = std::move(results);
    if (partial) art.report["partial"] = true;
    return art;
}

RunArtifacts run_code(const ExperimentConfig& cfg) {
    const ExperimentParams& p = cfg.params;
    const CqBlockChannel& ch = *cfg.channel;
    RunArtifacts art{Json::object(), code_summary_table(), {}};

    struct PerN {
        Code code;
        ErrorReport err;
    };
    const long count = static_cast<long>(p.n_values.size());
    std::vector<std::optional<PerN>> built(static_cast<std::size_t>(count));
    std::vector<std::string> overruns(static_cast<std::size_t>(count));
    parallel_for(count, p.threads, [&](long i) {
        const int n = p.n_values[static_cast<std::size_t>(i)];
        try {
            const TypicalityReport rep =
                conditional_typicality_pipeline(*cfg.process, ch, n, p.eps, false, p.work_cap);
            if (ch.is_imc()) {
                const BlockOutputMap w = output_map(ch);
                Code code = greedy_code(rep, w, p.lambda);
                const ErrorReport err = evaluate_errors(code, ch);
                built[static_cast<std::size_t>(i)] = PerN{std::move(code), err};
            } else {
                const InducedBlockChannel induced(*cfg.process, ch, n, p.work_cap);
                const BlockOutputMap w = output_map(induced);
                Code lifted = lift_code_to_memory(greedy_code(rep, w, p.lambda), ch, p.lambda);
                const ErrorReport err = evaluate_errors(lifted, ch);
                built[static_cast<std::size_t>(i)] = PerN{std::move(lifted), err};
            }
        } catch (const ResourceError& e) {
            overruns[static_cast<std::size_t>(i)] = e.what();
        }
    });

    Json results = Json::array();
    Json codes = Json::array();
    bool partial = false;
    for (long i = 0; i < count; ++i) {
        const std::optional<PerN>& slot = built[static_cast<std::size_t>(i)];
        if (!slot) {
            if (results.empty()) throw ResourceError(overruns[static_cast<std::size_t>(i)]);
            partial = true;
            continue;
        }
        if (partial) continue;
        add_code_summary_row(art.table, slot->code, slot->err);
        Json rec = Json::object();
        rec["n"] = slot->code.n();
        rec["size"] = slot->code.size();
        rec["rate_per_site"] = slot->code.rate_per_site();
        rec["max_error"] = slot->err.max_error;
        rec["avg_error"] = slot->err.avg_error;
        results.push_back(std::move(rec));
        // Full decoder dumps stay readable only at small block dimension.
        if (slot->code.decoder_dim() <= 64) {
            codes.push_back(code_to_json(slot->code));
        } else {
            Json stub = Json::object();
            stub["n"] = slot->code.n();
            stub["size"] = slot->code.size();
            stub["note"] = "decoders omitted above dimension 64";
            codes.push_back(std::move(stub));
        }
    }
    art.report["results"] = std::move(results);
    if (partial) art.report["partial"] = true;
    art.extra_json.emplace_back("codes.json", std::move(codes));
    return art;
}

RunArtifacts run_converse(const ExperimentConfig& cfg) {
    const ExperimentParams& p = cfg.params;
    const CapacityResult c1 = holevo_cn(*cfg.channel, 1, p.tol, p.work_cap);
    RunArtifacts art{Json::object(), CsvTable({"n", "c_used", "eps", "floor"}), {}};
    Json results = Json::array();
    for (int n : p.n_values) {
        const double floor = weak_converse_floor(c1.value, n, p.eps);
        art.table.add_row({std::to_string(n), format_real(c1.value), format_real(p.eps),
                           format_real(floor)});
        Json rec = Json::object();
        rec["n"] = n;
        rec["floor"] = floor;
        results.push_back(std::move(rec));
    }
    art.report["results"] = std::move(results);
    art.report["c_estimate"] = c1.value;
    art.report["c_estimate_note"] = "single-letter value; asymptotic, lower bound only";
    return art;
}

RunArtifacts run_mixing(const ExperimentConfig& cfg) {
    const ExperimentParams& p = cfg.params;
    const CqBlockChannel& ch = *cfg.channel;
    const long dk = checked_power(ch.site_dim(), p.mixing_k);
    Matrix corner = Matrix::Zero(dk, dk);
    corner(0, 0) = 1.0;
    const HermitianOperator b(corner);
    const int context = ch.is_imc() ? 0 : ch.memory_order();

    RunArtifacts art{Json::object(), CsvTable({"l", "defect"}), {}};
    Json results = Json::array();
    std::vector<double> defects;
    for (int l = p.mixing_l_min; l <= p.mixing_l_max; ++l) {
        const Sequence x(static_cast<std::size_t>(2 * p.mixing_k + l + context),
                         p.mixing_symbol);
        const double defect = mixing_defect(ch, x, b, b, l);
        defects.push_back(defect);
        art.table.add_row({std::to_string(l), format_real(defect)});
        Json rec = Json::object();
        rec["l"] = l;
        rec["defect"] = defect;
        results.push_back(std::move(rec));
    }
    Json ratios = Json::array();
    for (std::size_t i = 0; i + 1 < defects.size(); ++i)
        if (defects[i] > 1e-300) ratios.push_back(defects[i + 1] / defects[i]);
    art.report["results"] = std::move(results);
    art.report["decay_ratios"] = std::move(ratios);
    return art;
}

RunArtifacts run_aep(const ExperimentConfig& cfg) {
    const ExperimentParams& p = cfg.params;
    const CqBlockChannel& ch = *cfg.channel;
    if (ch.kind() != ChannelKind::Memoryless && ch.kind() != ChannelKind::Classical)
        throw UnsupportedError("aep: per-site product spectra need a channel without "
                               "noise correlation");
    if (cfg.process->kind() != ProcessKind::Iid)
        throw UnsupportedError("aep: the averaged block state is a product only for iid input");

    const std::vector<double>& weights = cfg.process->site_dist();
    Matrix avg = Matrix::Zero(ch.site_dim(), ch.site_dim());
    for (std::size_t a = 0; a < weights.size(); ++a)
        avg += weights[a] * ch.signals()[a].matrix();
    const DensityOperator site_avg(avg);
    const double rate = von_neumann_entropy(site_avg);
    const RealVector evals = eigh(site_avg.base()).eigenvalues;
    const std::vector<double> site_values(evals.data(), evals.data() + evals.size());

    RunArtifacts art{Json::object(),
                     CsvTable({"n", "beta", "beta_per_site", "entropy_rate", "gap"}), {}};
    Json results = Json::array();
    const bool partial = sweep(p.n_values, p.threads, results, [&](int n) {
        const WeightedSpectrum spectrum = iid_product_spectrum(site_values, n);
        const double beta = dimension_covering_exponent(spectrum, p.eps);
        Json rec = Json::object();
        rec["n"] = n;
        rec["beta"] = beta;
        rec["beta_per_site"] = beta / n;
        rec["gap"] = std::abs(beta / n - rate);
        return rec;
    });
    for (const Json& rec : results)
        art.table.add_row({std::to_string(rec.at("n").get<int>()),
                           format_real(rec.at("beta").get<double>()),
                           format_real(rec.at("beta_per_site").get<double>()),
                           format_real(rate), format_real(rec.at("gap").get<double>())});
    art.report["results"] = std::move(results);
    art.report["entropy_rate"] = rate;
    if (partial) art.report["partial"] = true;
    return art;
}

int run(const ExperimentConfig& cfg) {
    RunArtifacts art = [&] {
        switch (cfg.kind) {
            case ExperimentKind::Capacity: return run_capacity(cfg);
            case ExperimentKind::Typicality: return run_typicality(cfg);
            case ExperimentKind::Code: return run_code(cfg);
            case ExperimentKind::Converse: return run_converse(cfg);
            case ExperimentKind::Mixing: return run_mixing(cfg);
            case ExperimentKind::Aep: return run_aep(cfg);
        }
        throw ArgumentError("unknown experiment kind");
    }();

    art.report["schema"] = 1;
    art.report["kind"] = kind_name(cfg.kind);
    art.report["config_hash"] = cfg.hash_hex;
    art.report["seed"] = cfg.params.seed;

    const std::filesystem::path dir(cfg.out_dir);
    std::filesystem::create_directories(dir);
    write_file(dir / "report.json", art.report.dump(2) + "\n");
    write_file(dir / (kind_name(cfg.kind) + ".csv"), art.table.str());
    for (const auto& [name, payload] : art.extra_json)
        write_file(dir / name, payload.dump(2) + "\n");

    if (cfg.params.format == "json")
        std::cout << art.report.dump(2) << "\n";
    else
        std::cout << art.table.str();
    return 0;
}

}  // namespace
}  // namespace cqlab

int main(int argc, char** argv) {
    CLI::App app{"classical-quantum channel experiments"};
    app.require_subcommand(1);

    struct Flags {
        std::string config;
        std::string out;
        long seed = -1;
        int threads = 0;
        std::string format;
    } flags;

    const std::vector<std::string> kinds = {"capacity", "typicality", "code",
                                            "converse",  "mixing",    "aep"};
    for (const std::string& kind : kinds) {
        CLI::App* sub = app.add_subcommand(kind, kind + " experiment from a config file");
        sub->add_option("--config", flags.config, "JSON experiment config")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--out", flags.out, "output directory (overrides config)");
        sub->add_option("--seed", flags.seed, "seed override");
        sub->add_option("--threads", flags.threads, "worker threads for independent n-values");
        sub->add_option("--format", flags.format, "stdout summary format")
            ->check(CLI::IsMember({"csv", "json"}));
    }

    CLI11_PARSE(app, argc, argv);

    try {
        cqlab::ExperimentConfig cfg = cqlab::load_config_file(flags.config);
        const std::string chosen = app.get_subcommands().at(0)->get_name();
        if (chosen != cqlab::kind_name(cfg.kind))
            throw cqlab::ArgumentError("config error at /kind: config says '" +
                                       cqlab::kind_name(cfg.kind) + "' but the subcommand is '" +
                                       chosen + "'");
        if (!flags.out.empty()) cfg.out_dir = flags.out;
        if (flags.seed >= 0) cfg.params.seed = static_cast<unsigned>(flags.seed);
        if (flags.threads > 0) cfg.params.threads = flags.threads;
        if (!flags.format.empty()) cfg.params.format = flags.format;
        return cqlab::run(cfg);
    } catch (const cqlab::ResourceError& e) {
        std::cerr << "resource error: " << e.what() << "\n";
        return 3;
    } catch (const cqlab::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    } catch (const cqlab::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
