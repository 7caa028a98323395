#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "cellforest/correction.hpp"
#include "cellforest/io.hpp"
#include "cellforest/metrics.hpp"
#include "cellforest/simulator.hpp"
#include "cellforest/tracking.hpp"

namespace py = pybind11;
using namespace cellforest;

namespace {

using LabelArray = py::array_t<Label, py::array::c_style | py::array::forcecast>;

LabelArray frame_to_array(const LabeledFrame& f) {
  LabelArray a({f.height(), f.width()});
  std::copy(f.labels().begin(), f.labels().end(), a.mutable_data());
  return a;
}

LabeledFrame frame_from_array(const LabelArray& a, int index) {
  if (a.ndim() != 2) throw InputError("a frame must be a 2-D label array");
  const auto h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
  return LabeledFrame(index, w, h, std::vector<Label>(a.data(), a.data() + a.size()));
}

// (frames, height, width) label stack.
LabelArray movie_to_array(const Movie& m) {
  LabelArray a({m.frame_count(), m.height(), m.width()});
  Label* out = a.mutable_data();
  for (const LabeledFrame& f : m.frames) out = std::copy(f.labels().begin(), f.labels().end(), out);
  return a;
}

Movie movie_from_array(const LabelArray& a, double interval_min) {
  if (a.ndim() != 3) throw InputError("a movie must be a 3-D (frames, height, width) label array");
  Movie m;
  m.interval_min = interval_min;
  const auto h = static_cast<int>(a.shape(1)), w = static_cast<int>(a.shape(2));
  const std::size_t n = static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
  for (py::ssize_t f = 0; f < a.shape(0); ++f) {
    const Label* p = a.data() + f * static_cast<py::ssize_t>(n);
    m.frames.emplace_back(static_cast<int>(f), w, h, std::vector<Label>(p, p + n));
  }
  return m;
}

py::dict config_dict(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_cellforest, m) {
  m.doc() = "Lineage forest reconstruction and segmentation-error correction for labeled cell movies";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<GrowthOverflow>(m, "GrowthOverflow", PyExc_RuntimeError);

  py::class_<Movie>(m, "Movie")
      .def(py::init([](const LabelArray& labels, double interval_min) {
             return movie_from_array(labels, interval_min);
           }),
           py::arg("labels"), py::arg("interval_min") = 5.0)
      .def_readwrite("interval_min", &Movie::interval_min)
      .def_property_readonly("frame_count", &Movie::frame_count)
      .def_property_readonly("width", &Movie::width)
      .def_property_readonly("height", &Movie::height)
      .def("labels", &movie_to_array, "All frames as a (frames, height, width) uint32 array")
      .def("frame", [](const Movie& mv, int f) { return frame_to_array(mv.frames.at(f)); })
      .def(py::self == py::self)
      .def("__len__", &Movie::frame_count);

  py::class_<CellKey>(m, "CellKey")
      .def_readonly("frame", &CellKey::frame)
      .def_readonly("label", &CellKey::label)
      .def("__repr__", [](const CellKey& k) {
        return "CellKey(" + std::to_string(k.frame) + ", " + std::to_string(k.label) + ")";
      })
      .def("__iter__", [](const CellKey& k) { return py::iter(py::make_tuple(k.frame, k.label)); });

  py::class_<LineageForest>(m, "LineageForest")
      .def_property_readonly("frame_count", &LineageForest::frame_count)
      .def("__len__", &LineageForest::size)
      .def("roots", [](const LineageForest& f) {
        std::vector<CellKey> out;
        for (NodeId id : f.roots()) out.push_back(f.node(id).key);
        return out;
      })
      .def("children", [](const LineageForest& f, int frame, Label label) {
        std::vector<CellKey> out;
        const auto id = f.find({frame, label});
        if (!id) throw InputError("no cell " + std::to_string(label) + " at frame " + std::to_string(frame));
        for (NodeId c : f.node(*id).children) out.push_back(f.node(c).key);
        return out;
      })
      .def("clone_id", [](const LineageForest& f, int frame, Label label) {
        const auto id = f.find({frame, label});
        if (!id) throw InputError("no cell " + std::to_string(label) + " at frame " + std::to_string(frame));
        return f.node(*id).clone_id;
      })
      .def("status", [](const LineageForest& f, int frame, Label label) {
        const auto id = f.find({frame, label});
        if (!id) throw InputError("no cell " + std::to_string(label) + " at frame " + std::to_string(frame));
        return std::string(to_string(f.node(*id).status));
      })
      .def("segment_count", [](const LineageForest& f) { return extract_segments(f).size(); })
      .def("to_tsv", &forest_to_tsv)
      .def("to_dot", &forest_to_dot)
      .def_static("from_tsv", [](const std::string& text) { return forest_from_tsv(text); });

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def(py::init([](const py::dict& d) {
             const std::string text = py::str(py::module_::import("json").attr("dumps")(d));
             return sim_config_from_json(nlohmann::json::parse(text));
           }),
           py::arg("config"))
      .def_readwrite("n_clones", &SimConfig::n_clones)
      .def_readwrite("frames", &SimConfig::frames)
      .def_readwrite("interval_min", &SimConfig::interval_min)
      .def_readwrite("width", &SimConfig::width)
      .def_readwrite("height", &SimConfig::height)
      .def_readwrite("growth_rate", &SimConfig::growth_rate)
      .def_readwrite("division_length_mean", &SimConfig::division_length_mean)
      .def_readwrite("division_length_cv", &SimConfig::division_length_cv)
      .def_readwrite("seed", &SimConfig::seed)
      .def("to_dict", [](const SimConfig& c) { return config_dict(sim_config_to_json(c)); });

  py::class_<ErrorConfig>(m, "ErrorConfig")
      .def(py::init([](double p_over, double p_over_persistent, int persist_len, double p_under,
                       std::uint64_t seed) {
             return ErrorConfig{p_over, p_over_persistent, persist_len, p_under, seed};
           }),
           py::arg("p_over") = 0.0, py::arg("p_over_persistent") = 0.0, py::arg("persist_len") = 4,
           py::arg("p_under") = 0.0, py::arg("seed") = 1)
      .def_readwrite("p_over", &ErrorConfig::p_over_transient)
      .def_readwrite("p_over_persistent", &ErrorConfig::p_over_persistent)
      .def_readwrite("persist_len", &ErrorConfig::persist_len)
      .def_readwrite("p_under", &ErrorConfig::p_under)
      .def_readwrite("seed", &ErrorConfig::seed);

  py::class_<AnalysisParams>(m, "AnalysisParams")
      .def(py::init([](double T, double M, int min_life, int radius, int max_sweeps) {
             AnalysisParams p{T, M, min_life, radius, max_sweeps};
             p.validate();
             return p;
           }),
           py::arg("T") = 0.75, py::arg("M") = 0.90, py::arg("min_life") = 3, py::arg("radius") = 5,
           py::arg("max_sweeps") = 5)
      .def_readwrite("T", &AnalysisParams::T)
      .def_readwrite("M", &AnalysisParams::M)
      .def_readwrite("min_life", &AnalysisParams::min_life_frames)
      .def_readwrite("radius", &AnalysisParams::neighborhood_radius_px)
      .def_readwrite("max_sweeps", &AnalysisParams::max_sweeps);

  py::class_<SimResult>(m, "Simulation")
      .def_readonly("movie", &SimResult::movie)
      .def_readonly("truth", &SimResult::truth);

  py::class_<CorrectionEvent>(m, "CorrectionEvent")
      .def_property_readonly("kind", [](const CorrectionEvent& e) { return std::string(to_string(e.kind)); })
      .def_readonly("frame_from", &CorrectionEvent::frame_from)
      .def_readonly("frame_to", &CorrectionEvent::frame_to)
      .def_readonly("labels_before", &CorrectionEvent::labels_before)
      .def_readonly("labels_after", &CorrectionEvent::labels_after)
      .def_readonly("score_used", &CorrectionEvent::score_used)
      .def_readonly("note", &CorrectionEvent::note);

  py::class_<CorrectionResult>(m, "CorrectionResult")
      .def_readonly("movie", &CorrectionResult::movie)
      .def_readonly("forest", &CorrectionResult::forest)
      .def_readonly("events", &CorrectionResult::events)
      .def_readonly("sweeps", &CorrectionResult::sweeps)
      .def_property_readonly("committed", &CorrectionResult::committed_count)
      .def("events_tsv", [](const CorrectionResult& r) { return events_to_tsv(r.events); });

  py::class_<ValidityReport>(m, "ValidityReport")
      .def_readonly("total_segments", &ValidityReport::total_segments)
      .def_readonly("valid_segments", &ValidityReport::valid_segments)
      .def_readonly("valid_fraction", &ValidityReport::valid_fraction)
      .def_readonly("excluded_entrant_segments", &ValidityReport::excluded_entrant_segments);

  py::class_<TruthComparison>(m, "TruthComparison")
      .def_readonly("precision", &TruthComparison::precision)
      .def_readonly("recall", &TruthComparison::recall)
      .def_readonly("f1", &TruthComparison::f1)
      .def_readonly("mean_matched_iou", &TruthComparison::mean_matched_iou)
      .def_readonly("matched_segments", &TruthComparison::matched_segments)
      .def_readonly("spurious_divisions", &TruthComparison::spurious_divisions)
      .def_readonly("missed_divisions", &TruthComparison::missed_divisions)
      .def("__str__", &render_comparison);

  m.def("simulate", [](const SimConfig& c) {
    py::gil_scoped_release release;
    return simulate(c);
  });
  m.def(
      "inject_errors",
      [](const Movie& movie, const LineageForest& truth, const ErrorConfig& cfg) {
        py::gil_scoped_release release;
        return inject_errors(movie, truth, cfg).movie;
      },
      py::arg("movie"), py::arg("truth"), py::arg("config"));
  m.def(
      "correct",
      [](const Movie& movie, const AnalysisParams& params) {
        py::gil_scoped_release release;
        return run_correction_loop(movie, params);
      },
      py::arg("movie"), py::arg("params") = AnalysisParams{});
  m.def("track", [](const Movie& movie) { return analyze_without_correction(movie); },
        "Tracking and forest assembly only");
  m.def("validity", [](const LineageForest& f, bool entrants) { return validity_report(f, entrants); },
        py::arg("forest"), py::arg("include_entrants") = false);
  m.def("compare_to_truth", &compare_to_truth, py::arg("pred"), py::arg("pred_movie"), py::arg("truth"),
        py::arg("truth_movie"));
  m.def(
      "match_frame_pair",
      [](const LabelArray& prev, const LabelArray& curr) {
        std::vector<std::tuple<Label, Label, std::int64_t>> out;
        for (const TrackingLink& l : match_frame_pair(frame_from_array(prev, 0), frame_from_array(curr, 1))) {
          out.emplace_back(l.prev.label, l.curr.label, l.overlap_px);
        }
        return out;
      },
      "(prev_label, curr_label, overlap_px) for every linked curr cell");
  m.def("read_movie", [](const std::filesystem::path& p) { return read_movie(p); });
  m.def("write_movie", [](const Movie& mv, const std::filesystem::path& dir) { write_movie(mv, dir); });
}
