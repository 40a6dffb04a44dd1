// Copyright 2026 The Lumiparam Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "commands.h"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "lumiparam/error.h"
#include "lumiparam/image_io.h"
#include "lumiparam/param_file.h"

namespace lumiparam::cli {

namespace fs = std::filesystem;

namespace {

std::string Lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool IsPanorama(const fs::path& path) {
  const std::string ext = Lower(path.extension().string());
  return ext == ".hdr" || ext == ".pfm";
}

// Runs task(i) for i in [0, n) on up to `jobs` threads. Each task owns its
// outputs, so the results do not depend on the scheduling.
template <typename Task>
void ParallelFor(int n, int jobs, Task task) {
  const int workers = std::max(1, std::min(jobs, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (int i = next++; i < n; i = next++) task(i);
    });
  }
  for (auto& t : threads) t.join();
}

// Error text for the diagnostic stream.
std::string Describe(const std::exception& e) {
  if (const auto* v = dynamic_cast<const ValidationError*>(&e)) {
    return std::string("validation error at ") + v->path() + ": " + v->what();
  }
  if (const auto* f = dynamic_cast<const FormatError*>(&e)) {
    return std::string("format error: ") + f->what();
  }
  return e.what();
}

void WriteText(const fs::path& path, const std::string& text) {
  WriteFileBytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

fs::path ReplaceSuffix(const fs::path& path, const std::string& old_suffix,
                       const std::string& new_suffix) {
  std::string name = path.filename().string();
  if (name.size() > old_suffix.size() &&
      Lower(name.substr(name.size() - old_suffix.size())) == old_suffix) {
    name.resize(name.size() - old_suffix.size());
  } else {
    name = path.stem().string();
  }
  return path.parent_path() / (name + new_suffix);
}

Eigen::Vector3d ParseVector(const std::string& text) {
  Eigen::Vector3d v;
  std::stringstream in(text);
  std::string item;
  for (int i = 0; i < 3; ++i) {
    if (!std::getline(in, item, ',')) throw InvalidArgument("expected three comma-separated numbers");
    v[i] = std::stod(item);
  }
  if (std::getline(in, item, ',')) throw InvalidArgument("expected three comma-separated numbers");
  if (!(v.norm() > 0.0)) throw InvalidArgument("camera direction must be nonzero");
  return v.normalized();
}

void AddConfigFlags(CLI::App& cmd, ConfigFlags& flags) {
  cmd.add_option("--config", flags.config_path, "codec settings file (.toml or .json)");
  cmd.add_option("--mode", flags.mode, "integration weighting")
      ->check(CLI::IsMember({"solid-angle", "paper-literal"}));
  cmd.add_option("--ambient", flags.ambient, "ambient SH fit")
      ->check(CLI::IsMember({"masked-fit", "project"}));
  cmd.add_option("--order", flags.order, "SH order of the ambient");
  cmd.add_option("--anchors", flags.anchors, "number of Gaussian anchors");
  cmd.add_option("--angular-size", flags.angular_size, "Gaussian angular size s");
  cmd.add_option("--percentile", flags.percentile, "fraction of pixels treated as light sources");
  cmd.add_option("--knn", flags.knn, "anchor neighborhood size");
  cmd.add_flag("--sparsify", flags.sparsify, "apply SLSparsemax to the distribution");
}

struct DecomposeArgs {
  std::vector<std::string> inputs;
  std::string output;
  ConfigFlags config;
  bool preview = false;
  std::optional<int> jobs;
};

int RunDecompose(const DecomposeArgs& args, std::ostream& out, std::ostream& err) {
  const CodecConfig config = BuildConfig(args.config);
  std::vector<std::string> expand_errors;
  const std::vector<fs::path> inputs = ExpandInputs(args.inputs, expand_errors);
  for (const auto& e : expand_errors) err << "error: " << e << '\n';
  if (inputs.empty()) {
    err << "warning: no input panoramas\n";
    return expand_errors.empty() ? kExitOk : kExitFailure;
  }

  // A single file input with -o names the output file; otherwise -o is a
  // directory.
  const bool output_is_file = !args.output.empty() && args.inputs.size() == 1 &&
                              inputs.size() == 1 && !fs::is_directory(args.inputs[0]) &&
                              !fs::is_directory(args.output) && args.output.back() != '/';
  if (!args.output.empty() && !output_is_file) fs::create_directories(args.output);

  std::vector<fs::path> outputs(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (output_is_file) {
      outputs[i] = args.output;
    } else if (!args.output.empty()) {
      outputs[i] = fs::path(args.output) / DefaultParamPath(inputs[i]).filename();
    } else {
      outputs[i] = DefaultParamPath(inputs[i]);
    }
  }

  std::vector<std::string> errors(inputs.size());
  ParallelFor(static_cast<int>(inputs.size()), ResolveJobs(args.jobs), [&](int i) {
    try {
      const EquirectImage pano = ReadImageFile(inputs[i]);
      const Decomposition dec = Decompose(pano, config);
      ParamFile file;
      file.params = dec.params;
      file.meta.source = inputs[i].string();
      file.meta.width = pano.width();
      file.meta.height = pano.height();
      file.meta.mode = config.mode;
      file.meta.ambient = config.ambient;
      file.meta.percentile = config.percentile;
      file.meta.sparsified = dec.sparsify_report.has_value();
      if (dec.sparsify_report) {
        file.meta.kappa = dec.sparsify_report->kappa;
        file.meta.tau = dec.sparsify_report->tau;
      }
      WriteParamFile(outputs[i], file);
      if (args.preview) {
        const EquirectImage rec = Reconstruct(file.params, pano.geometry());
        const Bytes png = WritePreviewPng(rec);
        WriteFileBytes(ReplaceSuffix(outputs[i], ".json", ".png"), png);
      }
    } catch (const std::exception& e) {
      errors[i] = Describe(e);
    }
  });

  int failures = static_cast<int>(expand_errors.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (errors[i].empty()) {
      out << "wrote " << outputs[i].string() << '\n';
    } else {
      err << "error: " << inputs[i].string() << ": " << errors[i] << '\n';
      ++failures;
    }
  }
  if (failures > 0) {
    err << "decompose: " << failures << " of " << inputs.size() + expand_errors.size()
        << " inputs failed\n";
  }
  return failures == 0 ? kExitOk : kExitFailure;
}

struct ReconstructArgs {
  std::string input;
  std::string output;
  std::optional<int> width;
  std::optional<int> height;
  bool preview = false;
  double exposure = 1.0;
};

int RunReconstruct(const ReconstructArgs& args, std::ostream& out, std::ostream&) {
  const ParamFile file = ReadParamFile(args.input);
  int width = args.width.value_or(file.meta.width);
  int height = args.height.value_or(file.meta.height);
  if (width <= 0 || height <= 0) {
    width = 512;
    height = 256;
  }
  const GridGeometry geom(width, height);
  const EquirectImage rec = Reconstruct(file.params, geom);
  const fs::path output =
      args.output.empty() ? ReplaceSuffix(args.input, ".mixlight.json", ".hdr") : fs::path(args.output);
  WriteImageFile(output, rec);
  out << "wrote " << output.string() << '\n';
  if (args.preview) {
    const fs::path png = fs::path(output).replace_extension(".png");
    WriteFileBytes(png, WritePreviewPng(rec, args.exposure));
    out << "wrote " << png.string() << '\n';
  }
  return kExitOk;
}

struct SparsifyArgs {
  std::string input;
  std::string output;
};

int RunSparsify(const SparsifyArgs& args, std::ostream& out, std::ostream&) {
  ParamFile file = ReadParamFile(args.input);
  const CredibilityReport report = SparsifyParams(file.params);
  file.meta.sparsified = true;
  file.meta.kappa = report.kappa;
  file.meta.tau = report.tau;
  const fs::path output =
      args.output.empty() ? ReplaceSuffix(args.input, ".json", ".sparse.json") : fs::path(args.output);
  WriteParamFile(output, file);
  out << "wrote " << output.string() << " (kappa " << report.kappa << ", tau " << report.tau << ")\n";
  return kExitOk;
}

struct EvalArgs {
  std::string pred;
  std::string gt;
  std::string output;
  std::vector<std::string> renders;
  std::string render_dir;
  int render_size = 64;
  std::string camera;
  bool sml = false;
  double sml_epsilon = 1e-2;
  ConfigFlags config;
};

int RunEval(const EvalArgs& args, std::ostream& out, std::ostream&) {
  const CodecConfig config = BuildConfig(args.config);
  EvalOptions options;
  options.sphere_size = args.render_size;
  options.sml = args.sml;
  options.sml_epsilon = args.sml_epsilon;
  if (!args.camera.empty()) {
    options.view.to_camera = ParseVector(args.camera);
    if (std::abs(options.view.to_camera.z()) > 1.0 - 1e-9) options.view.up = Eigen::Vector3d::UnitY();
  }

  const EquirectImage gt = ReadImageFile(args.gt);
  const MixLightParams gt_params = Decompose(gt, config).params;

  std::optional<EquirectImage> pred;
  MixLightParams pred_params;
  if (Lower(fs::path(args.pred).extension().string()) == ".json") {
    const ParamFile file = ReadParamFile(args.pred);
    pred_params = file.params;
    pred = Reconstruct(pred_params, gt.geometry());
  } else {
    pred = ReadImageFile(args.pred);
    if (pred->geometry() != gt.geometry()) {
      throw ValidationError(args.pred, "prediction is " + std::to_string(pred->width()) + "x" +
                                           std::to_string(pred->height()) + " but ground truth is " +
                                           std::to_string(gt.width()) + "x" +
                                           std::to_string(gt.height()));
    }
    pred_params = Decompose(*pred, config).params;
  }
  if (pred_params.anchor_count() != gt_params.anchor_count()) {
    throw ValidationError(args.pred, "prediction uses " + std::to_string(pred_params.anchor_count()) +
                                         " anchors but the codec settings use " +
                                         std::to_string(gt_params.anchor_count()));
  }

  const RoundTripReport report = Evaluate(*pred, pred_params, gt, gt_params, options);
  out << ReportToText(report);
  if (!args.output.empty()) {
    const nlohmann::json doc = ReportToJson(report, {args.pred, args.gt});
    WriteText(args.output, doc.dump(2) + "\n");
  }

  if (!args.renders.empty()) {
    fs::path dir = args.render_dir;
    if (dir.empty()) dir = args.output.empty() ? fs::path(".") : fs::path(args.output).parent_path();
    if (dir.empty()) dir = ".";
    fs::create_directories(dir);
    const std::pair<const char*, const EquirectImage*> sides[] = {{"pred", &*pred}, {"gt", &gt}};
    for (const std::string& kind : args.renders) {
      for (const auto& [name, env] : sides) {
        const SphereRender render = kind == "diffuse"
                                        ? RenderDiffuseSphere(*env, args.render_size,
                                                              IrradianceMethod::kSh, 0.5, options.view)
                                        : RenderMirrorSphere(*env, args.render_size, options.view);
        const fs::path png = dir / (std::string(name) + "_" + kind + ".png");
        WriteFileBytes(png, WritePreviewPng(render.AsImage()));
      }
    }
  }
  return kExitOk;
}

void PrintImageInfo(const fs::path& path, std::ostream& out) {
  const EquirectImage img = ReadImageFile(path);
  const Eigen::VectorXd brightness = img.Brightness();
  const Eigen::Vector3d integral = IntegrateRadiance(img);
  out << "type image\n"
      << "width " << img.width() << '\n'
      << "height " << img.height() << '\n'
      << "brightness_min " << brightness.minCoeff() << '\n'
      << "brightness_max " << brightness.maxCoeff() << '\n'
      << "brightness_mean " << brightness.mean() << '\n'
      << "radiant_integral " << integral.x() << ' ' << integral.y() << ' ' << integral.z() << '\n';
}

void PrintParamInfo(const fs::path& path, std::ostream& out) {
  const ParamFile file = ReadParamFile(path);
  const MixLightParams& p = file.params;
  const Eigen::Index active = (p.sg.p.array() > 0.0).count();
  out << "type params\n"
      << "sh_order " << p.sh.order << '\n'
      << "sh_values " << p.sh.value_count() << '\n'
      << "anchors " << p.anchor_count() << '\n'
      << "k_nn " << p.k_nn << '\n'
      << "angular_size " << p.sg.s << '\n'
      << "active_anchors " << active << '\n'
      << "energy " << p.sg.e << '\n'
      << "ratio " << p.sg.r.x() << ' ' << p.sg.r.y() << ' ' << p.sg.r.z() << '\n'
      << "sg_values " << p.sg.p.size() + 4 << '\n'
      << "total_values " << p.sh.value_count() + p.sg.p.size() + 4 << '\n'
      << "mode " << WeightingName(file.meta.mode) << '\n'
      << "sparsified " << (file.meta.sparsified ? "true" : "false") << '\n';
  if (file.meta.kappa) out << "kappa " << *file.meta.kappa << '\n';
}

int RunInfo(const std::vector<std::string>& inputs, std::ostream& out, std::ostream& err) {
  int failures = 0;
  for (const std::string& input : inputs) {
    try {
      std::ostringstream block;
      if (Lower(fs::path(input).extension().string()) == ".json") {
        PrintParamInfo(input, block);
      } else {
        PrintImageInfo(input, block);
      }
      out << "file " << input << '\n' << block.str();
    } catch (const std::exception& e) {
      err << "error: " << input << ": " << Describe(e) << '\n';
      ++failures;
    }
  }
  return failures == 0 ? kExitOk : kExitFailure;
}

}  // namespace

int ResolveJobs(std::optional<int> flag) {
  if (flag) return std::max(1, *flag);
  if (const char* env = std::getenv("LUMIPARAM_JOBS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && value > 0) return static_cast<int>(value);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<fs::path> ExpandInputs(const std::vector<std::string>& args,
                                   std::vector<std::string>& errors) {
  std::vector<fs::path> files;
  for (const std::string& arg : args) {
    const fs::path path(arg);
    std::error_code ec;
    if (fs::is_directory(path, ec)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(path, ec)) {
        if (entry.is_regular_file() && IsPanorama(entry.path())) found.push_back(entry.path());
      }
      if (ec) errors.push_back(arg + ": " + ec.message());
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::exists(path, ec)) {
      files.push_back(path);
    } else {
      errors.push_back(arg + ": no such file or directory");
    }
  }
  return files;
}

fs::path DefaultParamPath(const fs::path& input) {
  return input.parent_path() / (input.stem().string() + ".mixlight.json");
}

CodecConfig BuildConfig(const ConfigFlags& flags) {
  CodecConfig config;
  if (!flags.config_path.empty()) LoadCodecConfig(flags.config_path, config);
  if (flags.mode) config.mode = ParseWeighting(*flags.mode);
  if (flags.ambient) config.ambient = ParseAmbientFit(*flags.ambient);
  if (flags.order) config.order = *flags.order;
  if (flags.anchors) config.anchors = *flags.anchors;
  if (flags.angular_size) config.angular_size = *flags.angular_size;
  if (flags.percentile) config.percentile = *flags.percentile;
  if (flags.knn) config.k_nn = *flags.knn;
  if (flags.sparsify) config.sparsify = true;
  config.Validate();
  return config;
}

int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mixed spherical-harmonic and spherical-Gaussian lighting parameters", "lumiparam"};
  app.require_subcommand(1);

  DecomposeArgs decompose;
  CLI::App* cmd_decompose = app.add_subcommand("decompose", "panoramas to parameter files");
  cmd_decompose->add_option("inputs", decompose.inputs, ".hdr/.pfm files or directories");
  cmd_decompose->add_option("-o,--output", decompose.output, "output file or directory");
  cmd_decompose->add_flag("--preview", decompose.preview, "also write a PNG of the reconstruction");
  cmd_decompose->add_option("--jobs", decompose.jobs, "parallel files (default LUMIPARAM_JOBS)")
      ->check(CLI::PositiveNumber);
  AddConfigFlags(*cmd_decompose, decompose.config);

  ReconstructArgs reconstruct;
  CLI::App* cmd_reconstruct = app.add_subcommand("reconstruct", "parameter file to an HDR map");
  cmd_reconstruct->add_option("input", reconstruct.input, "parameter file")->required();
  cmd_reconstruct->add_option("-o,--output", reconstruct.output, "output .hdr or .pfm");
  cmd_reconstruct->add_option("--width", reconstruct.width, "output width");
  cmd_reconstruct->add_option("--height", reconstruct.height, "output height");
  cmd_reconstruct->add_flag("--preview", reconstruct.preview, "also write a tone-mapped PNG");
  cmd_reconstruct->add_option("--exposure", reconstruct.exposure, "preview exposure");

  SparsifyArgs sparsify;
  CLI::App* cmd_sparsify = app.add_subcommand("sparsify", "SLSparsemax of the distribution");
  cmd_sparsify->add_option("input", sparsify.input, "parameter file")->required();
  cmd_sparsify->add_option("-o,--output", sparsify.output, "output parameter file");

  EvalArgs eval;
  CLI::App* cmd_eval = app.add_subcommand("eval", "compare a prediction to a ground-truth map");
  cmd_eval->add_option("pred", eval.pred, "predicted map or parameter file")->required();
  cmd_eval->add_option("gt", eval.gt, "ground-truth map")->required();
  cmd_eval->add_option("-o,--output", eval.output, "JSON report path");
  cmd_eval->add_option("--render", eval.renders, "sphere renders to write (diffuse, mirror)")
      ->delimiter(',')
      ->check(CLI::IsMember({"diffuse", "mirror"}));
  cmd_eval->add_option("--render-dir", eval.render_dir, "directory for sphere renders");
  cmd_eval->add_option("--render-size", eval.render_size, "sphere render size in pixels")
      ->check(CLI::PositiveNumber);
  cmd_eval->add_option("--camera", eval.camera, "direction from the sphere to the camera, x,y,z");
  cmd_eval->add_flag("--sml", eval.sml, "include the transport loss between distributions");
  cmd_eval->add_option("--sml-epsilon", eval.sml_epsilon, "entropic regularization of the transport");
  AddConfigFlags(*cmd_eval, eval.config);

  std::vector<std::string> info_inputs;
  CLI::App* cmd_info = app.add_subcommand("info", "summarize images or parameter files");
  cmd_info->add_option("inputs", info_inputs, "files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*cmd_decompose) return RunDecompose(decompose, out, err);
    if (*cmd_reconstruct) return RunReconstruct(reconstruct, out, err);
    if (*cmd_sparsify) return RunSparsify(sparsify, out, err);
    if (*cmd_eval) return RunEval(eval, out, err);
    if (*cmd_info) return RunInfo(info_inputs, out, err);
  } catch (const std::exception& e) {
    err << "error: " << Describe(e) << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace lumiparam::cli
