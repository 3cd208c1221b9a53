// crowdbqp: synthesize scenes, track, evaluate, benchmark and plot.
#include "crowdbqp/bench.hpp"
#include "crowdbqp/metrics.hpp"
#include "crowdbqp/scene.hpp"
#include "crowdbqp/svg_plot.hpp"
#include "crowdbqp/tracker.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>

using namespace crowdbqp;

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  return is;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

bool given(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& a : args)
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  return false;
}

// Expands `<sub> --config FILE` into options read from key=value lines.
// Keys already given on the command line keep their command-line value.
std::vector<std::string> expand_config(const CLI::App& app, std::vector<std::string> args) {
  if (args.empty()) return args;
  const CLI::App* sub = nullptr;
  try {
    sub = app.get_subcommand(args.front());
  } catch (const CLI::OptionNotFound&) {
    return args;
  }
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + i, args.begin() + i + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + i);
      break;
    }
  }
  if (path.empty()) return args;
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  std::vector<std::string> extra;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.rfind("--", 0) == 0) key = key.substr(2);
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    const std::string flag = "--" + key;
    const CLI::Option* opt = sub->get_option_no_throw(flag);
    if (opt == nullptr)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown key '" + key +
                               "' for " + sub->get_name());
    if (given(args, flag)) continue;
    if (opt->get_type_size() == 0) {
      if (CLI::detail::to_flag_value(value) > 0) extra.push_back(flag);
    } else {
      extra.push_back(flag + "=" + value);
    }
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online crowd tracking with block-simplex quadratic programs"};
  app.require_subcommand(1);

  // synth
  SceneConfig scene;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "generate a synthetic crowd sequence");
  synth->add_option("--targets", scene.n_targets, "number of targets")->capture_default_str();
  synth->add_option("--frames", scene.n_frames, "number of frames")->capture_default_str();
  synth->add_option("--groups", scene.n_groups, "number of coherent groups")->capture_default_str();
  synth->add_option("--palette", scene.palette_size, "distinct target colours")->capture_default_str();
  synth->add_option("--seed", scene.seed, "random seed")->capture_default_str();
  synth->add_option("--width", scene.width, "frame width")->capture_default_str();
  synth->add_option("--height", scene.height, "frame height")->capture_default_str();
  synth->add_option("--radius", scene.target_radius, "target radius, pixels")->capture_default_str();
  synth->add_option("--noise", scene.noise_sigma, "pixel noise sigma")->capture_default_str();
  synth->add_option("--jitter", scene.formation_jitter, "deviation of member offsets from the formation, pixels")->capture_default_str();
  synth->add_option("--out", synth_out, "output directory")->required();

  // track
  TrackerConfig tc;
  std::string frames_dir, init_path, tracks_out, trace_out, summary_out, appearance = "ridge", solver = "swap";
  bool no_motion = false, no_nmotion = false, no_proximity = false, no_group = false, no_prune = false;
  int prune_m = 3;
  auto* track = app.add_subcommand("track", "track the targets of a frame sequence");
  track->add_option("--frames", frames_dir, "directory of frame_%06d.ppm files")->required();
  track->add_option("--init", init_path, "CSV whose frame 0 gives the initial positions")->required();
  track->add_option("--out", tracks_out, "tracks CSV")->required();
  track->add_flag("--no-motion", no_motion, "disable the motion term");
  track->add_flag("--no-nmotion", no_nmotion, "disable the neighbourhood motion term");
  track->add_flag("--no-proximity", no_proximity, "disable the proximity term");
  track->add_flag("--no-group", no_group, "disable the group term");
  track->add_option("--appearance", appearance, "appearance backend")
      ->check(CLI::IsMember({"ridge", "ncc"}))->capture_default_str();
  track->add_option("--solver", solver, "solver variant")
      ->check(CLI::IsMember({"fw", "away", "swap", "exact"}))->capture_default_str();
  track->add_option("--eps", tc.solver.epsilon, "duality gap threshold")->capture_default_str();
  track->add_option("--max-iter", tc.solver.max_iterations, "iteration cap per frame")->capture_default_str();
  auto* prune_opt = track->add_option("--prune-m", prune_m, "extrema kept per target")->capture_default_str();
  track->add_flag("--no-prune", no_prune, "dense candidates")->excludes(prune_opt);
  track->add_option("--zeta", tc.zeta, "motion weight")->capture_default_str();
  track->add_option("--eta", tc.eta, "neighbourhood motion weight")->capture_default_str();
  track->add_option("--target-size", tc.target_size, "target diameter, pixels")->capture_default_str();
  track->add_option("--stride", tc.stride, "dense sampling stride")->capture_default_str();
  track->add_option("--trace", trace_out, "per-iteration solver trace CSV");
  track->add_option("--summary", summary_out, "per-frame summary CSV");

  // eval
  std::string eval_tracks, eval_gt, eval_out;
  int max_thresh = 50;
  auto* eval = app.add_subcommand("eval", "accuracy curve against ground truth");
  eval->add_option("--tracks", eval_tracks, "tracks CSV")->required();
  eval->add_option("--gt", eval_gt, "ground truth CSV")->required();
  eval->add_option("--max-thresh", max_thresh, "largest pixel threshold")->capture_default_str();
  eval->add_option("--out", eval_out, "curve CSV")->required();

  // bench
  BenchConfig bc;
  std::string bench_out, prune_out;
  auto* bench = app.add_subcommand("bench", "solver run-time comparison");
  bench->add_option("--sizes", bc.sizes, "target counts")->delimiter(',')->capture_default_str();
  bench->add_option("--seeds", bc.seeds, "instances per size")->capture_default_str();
  bench->add_option("--candidates", bc.problem.candidates, "candidates per target")->capture_default_str();
  bench->add_option("--eps", bc.epsilon, "duality gap threshold")->capture_default_str();
  bench->add_option("--max-iter", bc.max_iterations, "iteration cap")->capture_default_str();
  bench->add_option("--out", bench_out, "bench CSV")->required();
  bench->add_option("--prune-out", prune_out, "also compare dense and pruned tracking on the standard scene");

  // plot
  std::string plot_in, plot_out;
  auto* plot = app.add_subcommand("plot", "SVG plot of a curve or bench CSV");
  plot->add_option("--in", plot_in, "input CSV")->required();
  plot->add_option("--out", plot_out, "output SVG")->required();

  std::string config_file;  // consumed by expand_config; registered for --help
  for (auto* sub : app.get_subcommands([](CLI::App*) { return true; }))
    sub->add_option("--config", config_file, "key=value option file; command-line flags take precedence");

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = expand_config(app, std::move(args));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::reverse(args.begin(), args.end());  // CLI11 consumes the vector from the back
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*synth) {
      const Scene s = generate_scene(scene);
      write_scene(synth_out, s);
      std::cout << "wrote " << s.frames.size() << " frames and gt.csv to " << synth_out << "\n";
    } else if (*track) {
      tc.use_motion = !no_motion;
      tc.use_neighborhood = !no_nmotion;
      tc.use_proximity = !no_proximity;
      tc.use_group = !no_group;
      tc.appearance = appearance == "ncc" ? AppearanceBackend::ncc : AppearanceBackend::ridge;
      tc.solver.variant = solver == "fw"     ? SolverVariant::fw
                          : solver == "away" ? SolverVariant::fw_away
                          : solver == "exact" ? SolverVariant::exact
                                              : SolverVariant::fw_swap;
      if (no_prune) {
        tc.prune.reset();
      } else {
        PruneConfig pc;
        pc.m = prune_m;
        tc.prune = pc;
      }
      tc.keep_traces = !trace_out.empty();
      const auto frames = read_frames(frames_dir);
      const GroundTruth init = read_ground_truth_csv(std::filesystem::path(init_path));
      const auto result = track_sequence(frames, init.positions.front(), tc);
      auto os = open_out(tracks_out);
      write_tracks_csv(os, result.tracks);
      if (!trace_out.empty()) {
        auto ts = open_out(trace_out);
        write_tracking_trace_csv(ts, result.frames);
      }
      int coasted = 0;
      for (const auto& f : result.frames) {
        if (f.coasted) {
          ++coasted;
          std::cerr << "frame " << f.frame << ": solver did not converge, targets coast on motion prediction\n";
        }
      }
      if (!summary_out.empty()) {
        auto ss = open_out(summary_out);
        ss << "frame,num_vars,iterations,objective,gap,converged,coasted,solve_ms,frame_ms\n";
        for (const auto& f : result.frames) {
          ss << f.frame << ',' << f.num_vars << ',' << f.iterations << ',' << f.objective << ',' << f.gap << ','
             << f.converged << ',' << f.coasted << ',' << f.solve_ms << ',' << f.frame_ms << '\n';
        }
      }
      std::cout << "tracked " << init.num_targets() << " targets over " << frames.size() << " frames"
                << (coasted ? ", " + std::to_string(coasted) + " coasted frames" : std::string()) << "\n";
    } else if (*eval) {
      auto ts = open_in(eval_tracks);
      const TrackSet tracks = read_tracks_csv(ts);
      const GroundTruth gt = read_ground_truth_csv(std::filesystem::path(eval_gt));
      const AccuracyCurve curve = accuracy_curve(tracks, gt, max_thresh);
      auto os = open_out(eval_out);
      write_curve_csv(os, curve);
      std::cout << "accuracy@" << std::min(15, max_thresh) << "px = " << curve.at(std::min(15, max_thresh)) << "\n";
    } else if (*bench) {
      const auto rows = bench_solvers(bc);
      auto os = open_out(bench_out);
      write_bench_csv(os, rows);
      if (!prune_out.empty()) {
        const Scene s = generate_scene(SceneConfig{});
        auto ps = open_out(prune_out);
        write_prune_bench_csv(ps, bench_pruning(s, TrackerConfig{}, PruneConfig{}));
      }
      std::cout << "wrote " << rows.size() << " rows to " << bench_out << "\n";
    } else if (*plot) {
      auto is = open_in(plot_in);
      const std::string svg = plot_csv(is);
      auto os = open_out(plot_out);
      os << svg;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
