#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "streamres/error.hpp"
#include "streamres/events.hpp"
#include "streamres/ingest.hpp"
#include "streamres/kgexport.hpp"
#include "streamres/multires.hpp"
#include "streamres/pipeline.hpp"
#include "streamres/resmeans.hpp"
#include "streamres/sampling.hpp"

namespace py = pybind11;
using namespace streamres;

namespace {

std::string summary_json(const PipelineConfig& config) {
    const auto summary = run_pipeline(config);
    return summary_to_json(summary, config).dump();
}

py::dict metrics_dict(const MetricsReport& m) {
    py::dict d;
    d["tp"] = m.tp;
    d["fp"] = m.fp;
    d["fn"] = m.fn;
    d["precision"] = m.precision;
    d["recall"] = m.recall;
    d["f"] = m.f_measure;
    return d;
}

Window window_from(const std::vector<Record>& records) {
    Window w;
    w.records = records;
    if (!records.empty()) w.opened_at = records.front().timestamp;
    return w;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Weighted stream sampling, windowed clustering and event export";

    // Raised for every library failure; carries `code` and `line`.
    PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
    error_type.call_once_and_store_result(
        [&] { return py::object(py::exception<Error>(m, "StreamresError")); });
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            const auto& type = error_type.get_stored();
            py::object exc = type(e.what());
            exc.attr("code") = std::string(to_string(e.code()));
            exc.attr("line") = e.line() ? py::cast(*e.line()) : py::none();
            PyErr_SetObject(type.ptr(), exc.ptr());
        }
    });

    py::class_<Rng>(m, "Rng")
        .def(py::init<std::uint64_t>(), py::arg("seed") = 0)
        .def("next", [](Rng& r) { return r(); });
    m.def("derive_seed", &derive_seed, py::arg("seed"), py::arg("stage"));

    py::class_<Record>(m, "Record")
        .def(py::init([](std::string stream_id, std::uint64_t timestamp, Point features,
                         double weight, std::optional<std::string> label) {
                 Record r{std::move(stream_id), timestamp, std::move(features), weight,
                          std::move(label)};
                 validate_record(r);
                 return r;
             }),
             py::arg("stream_id"), py::arg("timestamp"), py::arg("features"),
             py::arg("weight") = 1.0, py::arg("label") = py::none())
        .def_readwrite("stream_id", &Record::stream_id)
        .def_readwrite("timestamp", &Record::timestamp)
        .def_readwrite("features", &Record::features)
        .def_readwrite("weight", &Record::weight)
        .def_readwrite("label", &Record::label)
        .def("__eq__", [](const Record& a, const Record& b) { return a == b; })
        .def("__repr__", [](const Record& r) { return "Record(" + record_to_json(r).dump() + ")"; });

    m.def("read_records", [](const std::string& path, const std::string& format) {
        return read_records(path, parse_format(format));
    }, py::arg("path"), py::arg("format") = "jsonl");
    m.def("generate_synthetic", [](const std::string& spec_json, std::uint64_t count) {
        return generate_synthetic(spec_from_json(nlohmann::json::parse(spec_json)), count);
    }, py::arg("spec_json"), py::arg("count"));

    // Sampling
    m.def("log_key", &log_key, py::arg("weight"), py::arg("u"));
    m.def("weighted_sample_indices",
          [](const std::vector<double>& w, std::size_t k, Rng& rng) {
              return weighted_sample_indices(w, k, rng);
          },
          py::arg("weights"), py::arg("k"), py::arg("rng"));
    m.def("weighted_with_replacement_indices",
          [](const std::vector<double>& w, std::size_t k, Rng& rng) {
              return weighted_with_replacement_indices(w, k, rng);
          },
          py::arg("weights"), py::arg("k"), py::arg("rng"));
    m.def("uniform_without_replacement",
          [](const std::vector<Record>& pop, std::size_t k, Rng& rng) {
              return uniform_without_replacement(pop, k, rng);
          },
          py::arg("population"), py::arg("k"), py::arg("rng"));

    py::class_<Reservoir>(m, "Reservoir")
        .def(py::init<std::size_t>(), py::arg("capacity"))
        .def("insert_uniform", &Reservoir::insert_uniform, py::arg("record"), py::arg("rng"))
        .def("insert_weighted", &Reservoir::insert_weighted, py::arg("record"), py::arg("rng"))
        .def("offer_keyed", &Reservoir::offer_keyed, py::arg("record"), py::arg("log_key"))
        .def("contents", &Reservoir::contents)
        .def("set_capacity", &Reservoir::set_capacity, py::arg("capacity"), py::arg("rng"))
        .def("clear", &Reservoir::clear)
        .def_property_readonly("capacity", &Reservoir::capacity)
        .def_property_readonly("seen", &Reservoir::seen)
        .def_property_readonly("replacements", &Reservoir::replacements)
        .def("__len__", &Reservoir::size);

    // Allocation
    m.def("sample_size", &sample_size, py::arg("population"), py::arg("e"));
    m.def("required_size", &required_size, py::arg("count"), py::arg("e"));
    m.def("allocate",
          [](const std::map<std::string, std::uint64_t>& counts, double e, std::size_t budget) {
              Counts c(counts.begin(), counts.end());
              const auto caps = allocate(c, {e, budget, 1000});
              return std::map<std::string, std::size_t>(caps.begin(), caps.end());
          },
          py::arg("counts"), py::arg("e") = 0.05, py::arg("budget") = 1000);

    py::class_<ReservoirPool>(m, "ReservoirPool")
        .def(py::init([](double e, std::size_t budget, std::uint64_t realloc_every) {
                 return ReservoirPool({e, budget, realloc_every});
             }),
             py::arg("e") = 0.05, py::arg("budget") = 1000, py::arg("realloc_every") = 1000)
        .def("on_arrival", &ReservoirPool::on_arrival, py::arg("record"), py::arg("rng"))
        .def("drain", &ReservoirPool::drain)
        .def("capacities", [](const ReservoirPool& p) {
            const auto c = p.capacities();
            return std::map<std::string, std::size_t>(c.begin(), c.end());
        })
        .def("counts", [](const ReservoirPool& p) {
            const auto c = p.counts();
            return std::map<std::string, std::uint64_t>(c.begin(), c.end());
        })
        .def("snapshot_json", [](const ReservoirPool& p) { return p.snapshot().dump(); })
        .def_property_readonly("total_entries", &ReservoirPool::total_entries)
        .def_property_readonly("arrivals", &ReservoirPool::arrivals);

    // Clustering
    py::class_<ClusterConfig>(m, "ClusterConfig")
        .def(py::init<>())
        .def_readwrite("k", &ClusterConfig::k)
        .def_readwrite("q", &ClusterConfig::q)
        .def_readwrite("window_size", &ClusterConfig::window_size)
        .def_readwrite("window_timeout", &ClusterConfig::window_timeout)
        .def_readwrite("max_iterations", &ClusterConfig::max_iterations)
        .def_readwrite("epsilon", &ClusterConfig::epsilon)
        .def_readwrite("restarts", &ClusterConfig::restarts)
        .def_readwrite("seed", &ClusterConfig::seed);

    py::class_<WindowClustering>(m, "WindowClustering")
        .def_readonly("window_seq", &WindowClustering::window_seq)
        .def_readonly("n_records", &WindowClustering::n_records)
        .def_readonly("initial_centroids", &WindowClustering::initial_centroids)
        .def_readonly("centroids", &WindowClustering::centroids)
        .def_readonly("assignment", &WindowClustering::assignment)
        .def_readonly("sse_per_cluster", &WindowClustering::sse_per_cluster)
        .def_readonly("sse_per_dimension", &WindowClustering::sse_per_dimension)
        .def_readonly("sse_total", &WindowClustering::sse_total)
        .def_readonly("iterations", &WindowClustering::iterations)
        .def_readonly("sse_history", &WindowClustering::sse_history)
        .def_property_readonly("closed_by",
                               [](const WindowClustering& c) { return to_string(c.closed_by); });

    m.def("minkowski",
          [](const Point& a, const Point& b, double q) { return minkowski(a, b, q); },
          py::arg("a"), py::arg("b"), py::arg("q") = 2.0);
    m.def("cluster_window",
          [](const std::vector<Record>& records, const ClusterConfig& config, Rng& rng,
             std::optional<std::vector<Point>> warm_start) {
              return cluster_window(window_from(records), config, warm_start, rng);
          },
          py::arg("records"), py::arg("config"), py::arg("rng"),
          py::arg("warm_start") = py::none());
    m.def("run_stream",
          [](const std::vector<Record>& records, const ClusterConfig& config) {
              VectorSource source(records);
              std::vector<WindowClustering> out;
              run_stream(source, config,
                         [&](const WindowClustering& c, const Window&) { out.push_back(c); });
              return out;
          },
          py::arg("records"), py::arg("config"));

    // Events
    py::class_<Event>(m, "Event")
        .def_readonly("window_seq", &Event::window_seq)
        .def_readonly("index", &Event::index)
        .def_readonly("cluster_id", &Event::cluster_id)
        .def_readonly("distance", &Event::distance)
        .def_readonly("score_contribution", &Event::score_contribution);

    m.def("detect_outliers",
          [](const WindowClustering& c, const std::vector<Record>& records, double lambda,
             bool robust) { return detect_outliers(c, window_from(records), {lambda, robust}); },
          py::arg("clustering"), py::arg("records"), py::arg("lam") = 3.0,
          py::arg("robust") = true);
    m.def("evaluate",
          [](const std::vector<Event>& events, const std::vector<Record>& records) {
              return metrics_dict(evaluate(events, window_from(records)));
          },
          py::arg("events"), py::arg("records"));
    m.def("f_measure", &f_measure, py::arg("precision"), py::arg("recall"));
    m.def("metrics_from_counts",
          [](std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
              return metrics_dict(metrics_from_counts(tp, fp, fn));
          },
          py::arg("tp"), py::arg("fp"), py::arg("fn"));

    // Graph export from stage files held in memory.
    m.def("export_graph",
          [](const std::string& windows_jsonl, const std::string& events_jsonl) {
              std::istringstream windows(windows_jsonl), events(events_jsonl);
              std::ostringstream ttl, dot;
              stage_export(windows, events, ttl, dot);
              return py::make_tuple(ttl.str(), dot.str());
          },
          py::arg("windows_jsonl"), py::arg("events_jsonl"));

    // Whole pipeline
    m.def("default_config_json", [] { return config_to_json(default_config()).dump(); });
    m.def("run_pipeline_json",
          [](const std::string& patch_json) {
              const auto config = config_from_json(nlohmann::json::parse(patch_json));
              validate(config);
              py::gil_scoped_release release;
              return summary_json(config);
          },
          py::arg("config_json"));
}
