// Python surface: channel/process construction (direct or from the JSON spec
// format), block outputs, entropic quantities, capacity optimization, the
// typicality pipeline, and greedy code construction.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cqlab/capacity.hpp"
#include "cqlab/serialization.hpp"

namespace py = pybind11;
using namespace cqlab;

namespace {

py::dict capacity_dict(const CapacityResult& res) {
    py::dict d;
    d["n"] = res.n;
    d["value"] = res.value;
    d["optimizer"] = res.optimizer;
    d["method"] = res.method;
    d["iterations"] = res.iterations;
    d["gap_estimate"] = res.gap_estimate;
    return d;
}

py::dict rate_point_dict(const RatePoint& pt) {
    py::dict d;
    d["n"] = pt.n;
    d["s_input"] = pt.entropy.s_input;
    d["s_output"] = pt.entropy.s_output;
    d["s_joint"] = pt.entropy.s_joint;
    d["chi"] = pt.chi;
    d["chi_per_site"] = pt.chi_per_site;
    return d;
}

py::dict typicality_dict(const TypicalityReport& rep) {
    py::dict d;
    d["n"] = rep.n;
    d["epsilon"] = rep.epsilon;
    d["epsilon_realized"] = rep.epsilon_realized;
    d["s_input_rate"] = rep.s_input_rate;
    d["s_output_rate"] = rep.s_output_rate;
    d["s_joint_rate"] = rep.s_joint_rate;
    d["s_conditional_rate"] = rep.s_conditional_rate;
    d["eta"] = rep.eta;
    d["eta_prime"] = rep.eta_prime;
    d["delta_n"] = rep.delta_n;
    d["p_typical_mass"] = rep.p_typical_mass;
    d["support_size"] = rep.support_size;
    py::list entries;
    for (const TypicalEntry& e : rep.typical) {
        py::dict entry;
        entry["x"] = e.x;
        entry["p"] = e.p;
        entry["c_trace"] = e.c_trace();
        entry["success"] = e.success;
        entries.append(entry);
    }
    d["typical"] = entries;
    return d;
}

py::dict code_dict(const Code& code, const ErrorReport& err) {
    py::dict d;
    d["n"] = code.n();
    d["size"] = code.size();
    d["rate_per_site"] = code.rate_per_site();
    d["max_error"] = err.max_error;
    d["avg_error"] = err.avg_error;
    py::list words;
    for (const CodeEntry& e : code.entries()) words.append(e.word);
    d["words"] = words;
    return d;
}

}  // namespace

PYBIND11_MODULE(cqlab, m) {
    m.doc() = "classical-quantum channels with correlated noise: entropic rates, "
              "typical projections, greedy codes, capacity bounds";

    // Translators run newest-first, so the base class must be registered
    // before the subclass or it would swallow ResourceError.
    auto base = py::register_exception<Error>(m, "CqlabError");
    py::register_exception<ResourceError>(m, "ResourceError", base);

    py::class_<InputProcess>(m, "Process")
        .def_static("iid",
                    [](const std::vector<double>& p) {
                        return InputProcess::iid(Alphabet::of_size(static_cast<int>(p.size())),
                                                 p);
                    },
                    py::arg("p"))
        .def_static("markov",
                    [](int order, const Eigen::MatrixXd& transition) {
                        return InputProcess::markov(
                            Alphabet::of_size(static_cast<int>(transition.cols())), order,
                            transition);
                    },
                    py::arg("order"), py::arg("transition"))
        .def_static("periodic",
                    [](int period, const std::vector<double>& block_dist) {
                        long a = 0;
                        for (long cand = 1; cand <= static_cast<long>(block_dist.size());
                             ++cand) {
                            long pw = 1;
                            for (int k = 0;
                                 k < period && pw <= static_cast<long>(block_dist.size()); ++k)
                                pw *= cand;
                            if (pw == static_cast<long>(block_dist.size())) {
                                a = cand;
                                break;
                            }
                        }
                        if (a == 0)
                            throw ArgumentError(
                                "periodic: table size is not a power of any alphabet size");
                        return InputProcess::periodic_product(
                            Alphabet::of_size(static_cast<int>(a)), period, block_dist);
                    },
                    py::arg("period"), py::arg("block_dist"))
        .def_static("from_json",
                    [](const std::string& text) {
                        return process_from_json(Json::parse(text), "/process");
                    },
                    py::arg("text"))
        .def_property_readonly("alphabet_size",
                               [](const InputProcess& p) { return p.alphabet().size; })
        .def("block_marginal",
             [](const InputProcess& p, int n) { return block_marginal(p, n).probs; },
             py::arg("n"))
        .def("entropy_rate", [](const InputProcess& p) { return entropy_rate(p); })
        .def("to_json", [](const InputProcess& p) { return process_to_json(p).dump(); });

    py::class_<CqBlockChannel>(m, "Channel")
        .def_static("memoryless",
                    [](const std::vector<Matrix>& signals) {
                        std::vector<DensityOperator> states;
                        states.reserve(signals.size());
                        for (const Matrix& s : signals) states.push_back(DensityOperator(s));
                        const int letters = static_cast<int>(states.size());
                        return CqBlockChannel::memoryless(Alphabet::of_size(letters),
                                                          std::move(states));
                    },
                    py::arg("signals"))
        .def_static("classical",
                    [](const Eigen::MatrixXd& rows) {
                        return CqBlockChannel::classical(
                            Alphabet::of_size(static_cast<int>(rows.rows())), rows);
                    },
                    py::arg("rows"))
        .def_static("from_json",
                    [](const std::string& text) {
                        return channel_from_json(Json::parse(text), "/channel");
                    },
                    py::arg("text"))
        .def_property_readonly("alphabet_size",
                               [](const CqBlockChannel& ch) { return ch.alphabet().size; })
        .def_property_readonly("site_dim", &CqBlockChannel::site_dim)
        .def_property_readonly("memory_order", &CqBlockChannel::memory_order)
        .def_property_readonly("input_memoryless", &CqBlockChannel::is_imc)
        .def("block_output",
             [](const CqBlockChannel& ch, const Sequence& x) {
                 return block_output_state(ch, x).matrix();
             },
             py::arg("x"))
        .def("to_json", [](const CqBlockChannel& ch) { return channel_to_json(ch).dump(); });

    m.def("von_neumann_entropy",
          [](const Matrix& rho) { return von_neumann_entropy(DensityOperator(rho)); },
          py::arg("rho"), "Von Neumann entropy in bits.");
    m.def("variational_distance",
          [](const Matrix& a, const Matrix& b) {
              return variational_distance(DensityOperator(a), DensityOperator(b));
          },
          py::arg("a"), py::arg("b"));
    m.def("covering_exponent",
          [](const RealVector& values, double eps) {
              return dimension_covering_exponent(values, eps);
          },
          py::arg("values"), py::arg("eps"),
          "log2 of the fewest eigenvalues holding mass 1 - eps.");
    m.def("product_covering_exponent",
          [](const std::vector<double>& site_values, int n, double eps) {
              return dimension_covering_exponent(iid_product_spectrum(site_values, n), eps);
          },
          py::arg("site_values"), py::arg("n"), py::arg("eps"));

    m.def("information_rates",
          [](const InputProcess& p, const CqBlockChannel& ch, int n_max) {
              const RateSequence seq = information_rate_sequence(p, ch, n_max);
              py::list points;
              for (const RatePoint& pt : seq.points) points.append(rate_point_dict(pt));
              py::dict d;
              d["points"] = points;
              d["truncated"] = seq.truncated;
              return d;
          },
          py::arg("process"), py::arg("channel"), py::arg("n_max"),
          "Block entropies and Holevo information for n = 1..n_max.");

    m.def("holevo_cn",
          [](const CqBlockChannel& ch, int n, double tol) {
              return capacity_dict(holevo_cn(ch, n, tol));
          },
          py::arg("channel"), py::arg("n"), py::arg("tol") = 1e-7);
    m.def("multi_letter_lower_bound",
          [](const CqBlockChannel& ch, const std::vector<int>& n_values, double tol) {
              py::list out;
              for (const MultiLetterPoint& pt : multi_letter_lower_bound(ch, n_values, tol)) {
                  py::dict d = capacity_dict(pt.detail);
                  d["per_site"] = pt.per_site;
                  out.append(d);
              }
              return out;
          },
          py::arg("channel"), py::arg("n_values"), py::arg("tol") = 1e-7);
    m.def("weak_converse_floor", &weak_converse_floor, py::arg("c"), py::arg("n"),
          py::arg("eps"), "Average-error floor forced on codes of rate c + eps.");

    m.def("typicality_pipeline",
          [](const InputProcess& p, const CqBlockChannel& ch, int n, double eps) {
              return typicality_dict(conditional_typicality_pipeline(p, ch, n, eps));
          },
          py::arg("process"), py::arg("channel"), py::arg("n"),
          py::arg("eps") = kDefaultTypicalityEps);

    m.def("greedy_code_run",
          [](const InputProcess& p, const CqBlockChannel& ch, int n, double lambda,
             double eps) {
              const TypicalityReport rep = conditional_typicality_pipeline(p, ch, n, eps);
              if (ch.is_imc()) {
                  const BlockOutputMap w = output_map(ch);
                  const Code code = greedy_code(rep, w, lambda);
                  return code_dict(code, evaluate_errors(code, ch));
              }
              const InducedBlockChannel induced(p, ch, n);
              const BlockOutputMap w = output_map(induced);
              const Code lifted = lift_code_to_memory(greedy_code(rep, w, lambda), ch, lambda);
              return code_dict(lifted, evaluate_errors(lifted, ch));
          },
          py::arg("process"), py::arg("channel"), py::arg("n"), py::arg("lam"),
          py::arg("eps") = kDefaultTypicalityEps,
          "Typicality pipeline, greedy maximal code, and its decoding errors; "
          "codes on channels with input memory are lifted before evaluation.");

    m.def("mixing_defect_sweep",
          [](const CqBlockChannel& ch, int symbol, int k, const std::vector<int>& l_values) {
              const long dk = checked_power(ch.site_dim(), k);
              Matrix corner = Matrix::Zero(dk, dk);
              corner(0, 0) = 1.0;
              const HermitianOperator b(corner);
              const int context = ch.is_imc() ? 0 : ch.memory_order();
              std::vector<double> out;
              out.reserve(l_values.size());
              for (int l : l_values) {
                  const Sequence x(static_cast<std::size_t>(2 * k + l + context), symbol);
                  out.push_back(mixing_defect(ch, x, b, b, l));
              }
              return out;
          },
          py::arg("channel"), py::arg("symbol"), py::arg("k"), py::arg("l_values"),
          "Output-correlation defect at growing separation, constant input.");
}
