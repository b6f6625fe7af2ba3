#include "doctest.h"
#include "helpers.hpp"

#include "cqlab/serialization.hpp"

#include <cstdio>
#include <fstream>
#include <string>

using namespace cqlab;

namespace {

Matrix ket(int i, int dim) {
    Matrix v = Matrix::Zero(dim, 1);
    v(i, 0) = 1.0;
    return v;
}

Matrix proj(int i, int dim) { return ket(i, dim) * ket(i, dim).adjoint(); }

// Captures the diagnostic of a failing parse; empty when nothing was thrown.
template <typename F>
std::string parse_diagnostic(F&& f) {
    try {
        f();
    } catch (const ArgumentError& e) {
        return e.what();
    }
    return {};
}

bool mentions(const std::string& message, const std::string& pointer) {
    return message.find(pointer) != std::string::npos;
}

Json minimal_capacity_config() {
    Json channel = Json::object();
    channel["kind"] = "memoryless";
    Json signals = Json::object();
    signals["0"] = matrix_to_json(proj(0, 2));
    signals["1"] = matrix_to_json(proj(1, 2));
    channel["signals"] = std::move(signals);

    Json cfg = Json::object();
    cfg["schema"] = 1;
    cfg["kind"] = "capacity";
    cfg["channel"] = std::move(channel);
    return cfg;
}

CqBlockChannel flip_markov_channel(double stay) {
    Eigen::MatrixXd q(2, 2);
    q << stay, 1.0 - stay, 1.0 - stay, stay;
    Matrix x(2, 2);
    x << 0.0, 1.0, 1.0, 0.0;
    std::vector<CPTPMap> maps = {CPTPMap::identity(2), CPTPMap({x})};
    std::vector<DensityOperator> signals = {DensityOperator(proj(0, 2)),
                                            DensityOperator(proj(1, 2))};
    return CqBlockChannel::markov_noise(Alphabet::of_size(2), MarkovNoise::make(q, maps),
                                        signals);
}

}  // namespace

TEST_CASE("matrix json round trips") {
    SUBCASE("complex entries survive exactly") {
        std::mt19937 gen(31);
        Matrix m = testutil::random_ginibre(3, 2, gen);
        Json j = matrix_to_json(m);
        REQUIRE(j.is_array());
        REQUIRE(j.size() == 3);
        REQUIRE(j[0].size() == 2);
        REQUIRE(j[0][0].size() == 2);
        Matrix back = matrix_from_json(j, "/m");
        REQUIRE(back.rows() == 3);
        REQUIRE(back.cols() == 2);
        for (long r = 0; r < 3; ++r)
            for (long c = 0; c < 2; ++c) CHECK(back(r, c) == m(r, c));
    }

    SUBCASE("shape errors carry the offending pointer") {
        CHECK(mentions(parse_diagnostic([] { matrix_from_json(Json::object(), "/m"); }), "/m"));
        Json ragged = Json::parse(R"([[[1,0],[2,0]],[[3,0]]])");
        CHECK(mentions(parse_diagnostic([&] { matrix_from_json(ragged, "/m"); }), "/m/1"));
        Json bad_cell = Json::parse(R"([[[1,0],7]])");
        CHECK(mentions(parse_diagnostic([&] { matrix_from_json(bad_cell, "/m"); }), "/m/0/1"));
        Json empty_row = Json::parse(R"([[]])");
        CHECK(mentions(parse_diagnostic([&] { matrix_from_json(empty_row, "/m"); }), "/m/0"));
    }
}

TEST_CASE("process specs round trip") {
    SUBCASE("iid") {
        InputProcess p = InputProcess::iid(Alphabet::of_size(2), {0.25, 0.75});
        Json j = process_to_json(p);
        CHECK(j.at("kind") == "iid");
        InputProcess back = process_from_json(j);
        CHECK(back.kind() == ProcessKind::Iid);
        BlockDistribution b = block_marginal(back, 2);
        CHECK(b.at({1, 0}) == doctest::Approx(0.75 * 0.25).epsilon(1e-15));
    }

    SUBCASE("markov keeps the transition and stationary law") {
        Eigen::MatrixXd t(2, 2);
        t << 0.9, 0.1, 0.4, 0.6;
        InputProcess p = InputProcess::markov(Alphabet::of_size(2), 1, t, std::nullopt);
        Json j = process_to_json(p);
        CHECK(j.at("kind") == "markov");
        CHECK(j.at("order") == 1);
        REQUIRE(j.contains("stationary"));
        CHECK(j.at("stationary")[0].get<double>() == doctest::Approx(0.8).epsilon(1e-12));
        InputProcess back = process_from_json(j);
        BlockDistribution lhs = block_marginal(p, 3);
        BlockDistribution rhs = block_marginal(back, 3);
        for (long i = 0; i < 8; ++i)
            CHECK(lhs.probs[static_cast<std::size_t>(i)] ==
                  doctest::Approx(rhs.probs[static_cast<std::size_t>(i)]).epsilon(1e-13));
    }

    SUBCASE("periodic product carries its alphabet") {
        InputProcess p = InputProcess::periodic_product(Alphabet::of_size(2), 2,
                                                        {0.0, 1.0, 0.0, 0.0});
        Json j = process_to_json(p);
        CHECK(j.at("kind") == "periodic_product");
        CHECK(j.at("alphabet") == 2);
        InputProcess back = process_from_json(j);
        CHECK(back.period() == 2);
        CHECK(back.alphabet().size == 2);
    }

    SUBCASE("table sizes that fit several alphabets need the explicit field") {
        // Sixteen entries with period 2 parse as alphabet 4 by default.
        Json j = Json::object();
        j["kind"] = "periodic_product";
        j["period"] = 2;
        j["block_dist"] = std::vector<double>(16, 1.0 / 16.0);
        InputProcess p = process_from_json(j);
        CHECK(p.alphabet().size == 4);
        j["alphabet"] = 4;
        CHECK(process_from_json(j).alphabet().size == 4);
    }

    SUBCASE("diagnostics name the field") {
        Json j = Json::object();
        j["kind"] = "juggle";
        CHECK(mentions(parse_diagnostic([&] { process_from_json(j); }), "/process/kind"));
        Json iid = Json::object();
        iid["kind"] = "iid";
        iid["p"] = std::vector<double>{0.25, 0.75};
        iid["extra"] = 1;
        CHECK(mentions(parse_diagnostic([&] { process_from_json(iid); }), "/process/extra"));
        Json bad_sum = Json::object();
        bad_sum["kind"] = "iid";
        bad_sum["p"] = std::vector<double>{0.5, 0.1};
        CHECK(mentions(parse_diagnostic([&] { process_from_json(bad_sum); }), "/process"));
        Json markov = Json::object();
        markov["kind"] = "markov";
        markov["order"] = 0;
        markov["transition"] = Json::parse("[[1.0]]");
        CHECK(mentions(parse_diagnostic([&] { process_from_json(markov); }), "/process/order"));
    }
}

TEST_CASE("channel specs round trip") {
    SUBCASE("memoryless") {
        std::mt19937 gen(41);
        CqBlockChannel ch = testutil::random_memoryless(2, 2, gen);
        Json j = channel_to_json(ch);
        CHECK(j.at("kind") == "memoryless");
        CHECK(j.at("alphabet") == 2);
        CqBlockChannel back = channel_from_json(j);
        for (const Sequence& x : {Sequence{0, 1}, Sequence{1, 1}}) {
            Matrix diff = block_output_state(ch, x).matrix() -
                          block_output_state(back, x).matrix();
            CHECK(diff.cwiseAbs().maxCoeff() < 1e-14);
        }
    }

    SUBCASE("classical rows") {
        Eigen::MatrixXd rows(2, 2);
        rows << 0.7, 0.3, 0.2, 0.8;
        CqBlockChannel ch = CqBlockChannel::classical(Alphabet::of_size(2), rows);
        Json j = channel_to_json(ch);
        CHECK(j.at("kind") == "classical");
        CHECK(j.at("rows")[0][1].get<double>() == doctest::Approx(0.3).epsilon(1e-15));
        CqBlockChannel back = channel_from_json(j);
        Matrix diff = block_output_state(ch, {0, 1}).matrix() -
                      block_output_state(back, {0, 1}).matrix();
        CHECK(diff.cwiseAbs().maxCoeff() < 1e-14);
    }

    SUBCASE("markov noise") {
        CqBlockChannel ch = flip_markov_channel(0.75);
        Json j = channel_to_json(ch);
        CHECK(j.at("kind") == "markov_noise");
        CHECK(j.at("noise_symbols") == 2);
        CqBlockChannel back = channel_from_json(j);
        for (const Sequence& x : {Sequence{0, 0, 1}, Sequence{1, 0, 1}}) {
            Matrix diff = block_output_state(ch, x).matrix() -
                          block_output_state(back, x).matrix();
            CHECK(diff.cwiseAbs().maxCoeff() < 1e-12);
        }
    }

    SUBCASE("finite memory") {
        std::mt19937 gen(43);
        std::vector<DensityOperator> window;
        for (int i = 0; i < 4; ++i) window.push_back(testutil::random_density(2, gen));
        Eigen::MatrixXd q1(1, 1);
        q1 << 1.0;
        CqBlockChannel ch = CqBlockChannel::finite_memory(
            Alphabet::of_size(2), MarkovNoise::make(q1, {CPTPMap::identity(2)}), 1, window);
        Json j = channel_to_json(ch);
        CHECK(j.at("kind") == "finite_memory");
        CHECK(j.at("order") == 1);
        CqBlockChannel back = channel_from_json(j);
        Sequence x = {1, 0, 1};
        Matrix diff = block_output_state(ch, x).matrix() -
                      block_output_state(back, x).matrix();
        CHECK(diff.cwiseAbs().maxCoeff() < 1e-14);
        CHECK(back.memory_order() == 1);
    }

    SUBCASE("diagnostics name the field") {
        Json j = Json::object();
        j["kind"] = "smoke";
        CHECK(mentions(parse_diagnostic([&] { channel_from_json(j); }), "/channel/kind"));
        Json noiseless = Json::object();
        noiseless["kind"] = "memoryless";
        CHECK(mentions(parse_diagnostic([&] { channel_from_json(noiseless); }),
                       "/channel/signals"));
        Json bad_rows = Json::object();
        bad_rows["kind"] = "classical";
        bad_rows["rows"] = Json::parse("[[0.5,0.6]]");
        CHECK(mentions(parse_diagnostic([&] { channel_from_json(bad_rows); }), "/channel"));
    }
}

TEST_CASE("experiment configs") {
    SUBCASE("happy path with a range of block lengths") {
        Json j = minimal_capacity_config();
        j["parameters"] = Json::object();
        j["parameters"]["n_min"] = 1;
        j["parameters"]["n_max"] = 3;
        j["parameters"]["tol"] = 1e-8;
        j["parameters"]["seed"] = 7;
        j["parameters"]["threads"] = 2;
        j["parameters"]["format"] = "json";
        j["out"] = "runs/demo";
        ExperimentConfig cfg = config_from_json(j);
        CHECK(cfg.kind == ExperimentKind::Capacity);
        CHECK(kind_name(cfg.kind) == "capacity");
        REQUIRE(cfg.channel.has_value());
        CHECK_FALSE(cfg.process.has_value());
        CHECK(cfg.params.n_values == std::vector<int>{1, 2, 3});
        CHECK(cfg.params.tol == doctest::Approx(1e-8));
        CHECK(cfg.params.seed == 7u);
        CHECK(cfg.params.threads == 2);
        CHECK(cfg.params.format == "json");
        CHECK(cfg.out_dir == "runs/demo");
        CHECK(cfg.hash_hex.size() == 16);
        CHECK(cfg.hash_hex == canonical_hash_hex(j));
    }

    SUBCASE("explicit block length list") {
        Json j = minimal_capacity_config();
        j["parameters"] = Json::object();
        j["parameters"]["n_values"] = std::vector<int>{2, 4};
        ExperimentConfig cfg = config_from_json(j);
        CHECK(cfg.params.n_values == std::vector<int>{2, 4});
    }

    SUBCASE("the list and the range are mutually exclusive") {
        Json j = minimal_capacity_config();
        j["parameters"] = Json::object();
        j["parameters"]["n_values"] = std::vector<int>{2};
        j["parameters"]["n_min"] = 1;
        CHECK(mentions(parse_diagnostic([&] { config_from_json(j); }),
                       "/parameters/n_values"));
    }

    SUBCASE("schema and structure diagnostics") {
        Json j = minimal_capacity_config();
        j["schema"] = 2;
        CHECK(mentions(parse_diagnostic([&] { config_from_json(j); }), "/schema"));

        Json missing = minimal_capacity_config();
        missing.erase("channel");
        CHECK(mentions(parse_diagnostic([&] { config_from_json(missing); }), "/channel"));

        Json unknown = minimal_capacity_config();
        unknown["plot"] = true;
        CHECK(mentions(parse_diagnostic([&] { config_from_json(unknown); }), "/plot"));

        Json bad_kind = minimal_capacity_config();
        bad_kind["kind"] = "banana";
        CHECK(mentions(parse_diagnostic([&] { config_from_json(bad_kind); }), "/kind"));
    }

    SUBCASE("experiments that consume an input process demand one") {
        Json j = minimal_capacity_config();
        j["kind"] = "typicality";
        CHECK(mentions(parse_diagnostic([&] { config_from_json(j); }), "/process"));

        Json mismatched = minimal_capacity_config();
        mismatched["kind"] = "code";
        Json p = Json::object();
        p["kind"] = "iid";
        p["p"] = std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3};
        mismatched["process"] = std::move(p);
        CHECK(mentions(parse_diagnostic([&] { config_from_json(mismatched); }), "/process"));
    }

    SUBCASE("parameter range diagnostics") {
        auto with_param = [](const char* key, Json value) {
            Json j = minimal_capacity_config();
            j["parameters"] = Json::object();
            j["parameters"][key] = std::move(value);
            return j;
        };
        CHECK(mentions(parse_diagnostic([&] { config_from_json(with_param("lambda", 1.5)); }),
                       "/parameters/lambda"));
        CHECK(mentions(parse_diagnostic([&] { config_from_json(with_param("threads", 0)); }),
                       "/parameters/threads"));
        CHECK(mentions(parse_diagnostic([&] { config_from_json(with_param("seed", -3)); }),
                       "/parameters/seed"));
        CHECK(mentions(parse_diagnostic([&] { config_from_json(with_param("format", "xml")); }),
                       "/parameters/format"));
        CHECK(mentions(
            parse_diagnostic([&] { config_from_json(with_param("mixing_symbol", 5)); }),
            "/parameters/mixing_symbol"));
        CHECK(mentions(parse_diagnostic([&] { config_from_json(with_param("work_cap", 0)); }),
                       "/parameters/work_cap"));
    }

    SUBCASE("files load through the same validation") {
        const std::string path = "cqlab_test_config.json";
        {
            std::ofstream out(path);
            out << minimal_capacity_config().dump();
        }
        ExperimentConfig cfg = load_config_file(path);
        CHECK(cfg.hash_hex == canonical_hash_hex(minimal_capacity_config()));
        std::remove(path.c_str());

        CHECK_THROWS_AS(load_config_file("does_not_exist.json"), ArgumentError);
        {
            std::ofstream out(path);
            out << "{ not json";
        }
        CHECK(mentions(parse_diagnostic([&] { load_config_file(path); }), "parse error"));
        std::remove(path.c_str());
    }
}

TEST_CASE("tabular output") {
    SUBCASE("csv shape") {
        CsvTable t({"a", "b"});
        t.add_row({"1", "x"});
        t.add_row({"2", "y"});
        CHECK(t.rows() == 2);
        CHECK(t.str() == "a,b\n1,x\n2,y\n");
        CHECK_THROWS_AS(t.add_row({"only_one"}), ArgumentError);
        CHECK_THROWS_AS(CsvTable({}), ArgumentError);
    }

    SUBCASE("reals print as the shortest faithful decimal") {
        CHECK(format_real(0.0) == "0");
        CHECK(format_real(0.5) == "0.5");
        CHECK(format_real(1.0) == "1");
        for (double v : {1.0 / 3.0, 2.5e17, -3.125e-7, 0.8112781244591328, 1e-300}) {
            const std::string s = format_real(v);
            CHECK(std::stod(s) == v);
        }
    }

    SUBCASE("capacity table layout") {
        MultiLetterPoint pt;
        pt.n = 2;
        pt.c_n = 2.0;
        pt.per_site = 1.0;
        pt.detail.method = "iterative";
        pt.detail.iterations = 5;
        pt.detail.gap_estimate = 0.0;
        CsvTable t = capacity_table({pt});
        CHECK(t.str() == "n,C_n,C_n/n,method,iterations,gap_estimate\n2,2,1,iterative,5,0\n");
    }

    SUBCASE("code summary layout") {
        CsvTable t = code_summary_table();
        CHECK(t.str() == "n,M,rate,max_err,avg_err\n");
        std::vector<CodeEntry> entries;
        entries.push_back({{0, 1}, HermitianOperator(proj(1, 4))});
        Code code(2, 4, entries);
        ErrorReport err;
        err.max_error = 0.25;
        err.avg_error = 0.25;
        add_code_summary_row(t, code, err);
        CHECK(t.str() == "n,M,rate,max_err,avg_err\n2,1,0,0.25,0.25\n");
    }
}

TEST_CASE("module records") {
    SUBCASE("entropy points") {
        RatePoint pt;
        pt.n = 3;
        pt.entropy = {1.5, 2.0, 3.0};
        pt.chi = 0.5;
        pt.chi_per_site = 0.5 / 3.0;
        Json j = entropy_record(pt);
        CHECK(j.at("n") == 3);
        CHECK(j.at("s_input").get<double>() == 1.5);
        CHECK(j.at("chi").get<double>() == 0.5);

        RateSequence seq;
        seq.points.push_back(pt);
        seq.truncated = true;
        Json rec = rate_sequence_record(seq);
        CHECK(rec.at("truncated") == true);
        CHECK(rec.at("points").size() == 1);
    }

    SUBCASE("typicality report") {
        CqBlockChannel ch = CqBlockChannel::memoryless(
            Alphabet::of_size(2),
            {DensityOperator(proj(0, 2)), DensityOperator(proj(1, 2))});
        InputProcess p = InputProcess::iid(ch.alphabet(), {0.5, 0.5});
        TypicalityReport rep = conditional_typicality_pipeline(p, ch, 2, 0.5);
        Json j = typicality_record(rep);
        CHECK(j.at("n") == 2);
        CHECK(j.at("epsilon").get<double>() == 0.5);
        CHECK(j.at("rates").contains("s_conditional"));
        CHECK(j.at("typical_count") == 4);
        CHECK(j.at("entries").size() == 4);
        CHECK(j.at("entries")[0].contains("c_trace"));
        CHECK_FALSE(j.contains("diagnostic"));
    }

    SUBCASE("code dump") {
        std::vector<CodeEntry> entries;
        entries.push_back({{0, 1}, HermitianOperator(proj(1, 4))});
        Code code(2, 4, entries);
        Json j = code_to_json(code);
        CHECK(j.at("n") == 2);
        CHECK(j.at("decoder_dim") == 4);
        CHECK(j.at("size") == 1);
        CHECK(j.at("entries")[0].at("word") == Json::parse("[0,1]"));
        CHECK(j.at("entries")[0].at("decoder").size() == 4);
    }

    SUBCASE("capacity record") {
        CapacityResult res;
        res.n = 1;
        res.value = 1.0;
        res.method = "grid";
        res.iterations = 11;
        res.optimizer = {0.5, 0.5};
        Json plain = capacity_record(res);
        CHECK_FALSE(plain.contains("optimizer"));
        Json full = capacity_record(res, true);
        CHECK(full.at("optimizer").size() == 2);
        CHECK(full.at("method") == "grid");
    }
}

TEST_CASE("hashing") {
    SUBCASE("known vectors") {
        CHECK(fnv1a64("") == 14695981039346656037ull);
        CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
        CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
    }

    SUBCASE("canonical form ignores member order") {
        Json a = Json::parse(R"({"x":1,"y":[1,2]})");
        Json b = Json::parse(R"({"y":[1,2],"x":1})");
        const std::string ha = canonical_hash_hex(a);
        CHECK(ha == canonical_hash_hex(b));
        CHECK(ha.size() == 16);
        CHECK(ha.find_first_not_of("0123456789abcdef") == std::string::npos);
        Json c = a;
        c["x"] = 2;
        CHECK(ha != canonical_hash_hex(c));
    }
}
