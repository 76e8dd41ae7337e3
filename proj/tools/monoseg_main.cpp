#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "monoseg/data.hpp"
#include "monoseg/trainer.hpp"

namespace fs = std::filesystem;
using namespace monoseg;

namespace {

// --- CSV readback for `report` (our own files: no quoting, comma-only) ---

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path,
                                               const std::string& header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != header)
    throw std::runtime_error(path.string() + ": unexpected header");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line))
    if (!line.empty()) rows.push_back(split_csv(line));
  return rows;
}

double num(const std::string& s) {
  std::size_t pos = 0;
  double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::runtime_error("bad number in CSV: " + s);
  return v;
}

struct RunSummary {
  std::string label;
  LossMode mode;
  bool lc_enabled;
  double sigma;
  double mean_dice = 0.0;
  double mean_iou = 0.0;
  double mean_hd = 0.0;  // over images with a defined HD
  int hd_count = 0;
  std::vector<std::pair<int, double>> label_accuracy;  // epoch -> value
};

RunSummary read_run(const fs::path& dir) {
  RunSummary r;
  r.label = dir.filename().string();
  if (r.label.empty()) r.label = dir.parent_path().filename().string();

  std::ifstream cfg_in(dir / "config.json");
  if (!cfg_in)
    throw std::runtime_error("cannot open " + (dir / "config.json").string());
  std::ostringstream ss;
  ss << cfg_in.rdbuf();
  TrainConfig cfg = train_config_from_json_text(ss.str());
  r.mode = cfg.mode;
  r.lc_enabled = cfg.lc_enabled;
  r.sigma = cfg.noise.sigma;

  auto eval_rows = read_csv(dir / "eval.csv", "image_id,dice,iou,hd");
  if (eval_rows.empty())
    throw std::runtime_error(dir.string() + ": eval.csv has no rows");
  double dice = 0.0, iou = 0.0, hd = 0.0;
  int hd_n = 0;
  for (const auto& row : eval_rows) {
    if (row.size() != 4)
      throw std::runtime_error(dir.string() + ": malformed eval.csv row");
    dice += num(row[1]);
    iou += num(row[2]);
    if (!row[3].empty()) {
      hd += num(row[3]);
      ++hd_n;
    }
  }
  r.mean_dice = dice / double(eval_rows.size());
  r.mean_iou = iou / double(eval_rows.size());
  r.hd_count = hd_n;
  r.mean_hd = hd_n ? hd / double(hd_n) : 0.0;

  auto epoch_rows = read_csv(
      dir / "epochs.csv",
      "epoch,mode,cc,mc_l,mc_r,mc_t,mc_b,mc_total,total,label_accuracy,lambda");
  for (const auto& row : epoch_rows) {
    if (row.size() != 11)
      throw std::runtime_error(dir.string() + ": malformed epochs.csv row");
    r.label_accuracy.emplace_back(int(num(row[0])), num(row[9]));
  }
  return r;
}

void cmd_synth(const std::string& out_dir, std::uint64_t seed,
               const DatasetOptions& opt) {
  Manifest m = generate_dataset(out_dir, seed, opt);
  std::cout << "wrote " << m.entries.size() << " images to " << out_dir
            << " (seed " << seed << ", sigma " << opt.sigma << ")\n";
}

void cmd_perturb(const std::string& boxes_in, const std::string& manifest_in,
                 const std::string& out_path, NoiseParams np, int height,
                 int width) {
  if (boxes_in.empty() == manifest_in.empty())
    throw std::invalid_argument("pass exactly one of --in / --manifest");
  if (!boxes_in.empty()) {
    if (height <= 0 || width <= 0)
      throw std::invalid_argument("--height/--width required with --in");
    auto records = read_boxes_jsonl(boxes_in);
    write_boxes_jsonl(out_path, perturb_dataset(records, np, height, width));
    std::cout << "perturbed " << records.size() << " records -> " << out_path
              << "\n";
  } else {
    Manifest m = read_manifest(manifest_in);
    std::vector<BoxRecord> clean;
    for (const ManifestEntry& e : m.entries)
      clean.push_back({e.image_id, e.clean_boxes});
    auto noisy = perturb_dataset(clean, np, m.height, m.width);
    for (std::size_t i = 0; i < m.entries.size(); ++i)
      m.entries[i].noisy_boxes = noisy[i].boxes;
    m.sigma = np.sigma;
    write_manifest(out_path, m);
    std::cout << "re-perturbed " << m.entries.size() << " entries -> "
              << out_path << "\n";
  }
}

void cmd_train(const std::string& config_path, const std::string& data_dir,
               const std::string& out_dir) {
  TrainConfig cfg = load_train_config(config_path);
  Manifest man = read_manifest(fs::path(data_dir) / "manifest.jsonl");
  LoadedDataset ds = load_dataset(man);
  RunReport rep = train(cfg, ds);

  fs::create_directories(out_dir);
  fs::path out(out_dir);
  write_steps_csv(out / "steps.csv", rep, cfg.mode);
  write_epochs_csv(out / "epochs.csv", rep, cfg.mode);
  write_events_jsonl(out / "events.jsonl", rep);
  save_checkpoint((out / "model.ckpt").string(), rep.final_params);
  {
    std::ofstream cj(out / "config.json", std::ios::binary);
    cj << train_config_to_json_text(cfg);
  }
  const EpochStats& last = rep.epochs.back();
  std::cout << "trained " << cfg.epochs << " epochs (" << rep.steps.size()
            << " steps); final loss " << csv_num(last.mean_loss.total)
            << ", label accuracy " << csv_num(last.label_accuracy) << "\n";
}

void cmd_eval(const std::string& ckpt_path, const std::string& data_dir,
              const std::string& out_path, double threshold, bool hd95) {
  ModelParams params = load_checkpoint(ckpt_path);
  Manifest man = read_manifest(fs::path(data_dir) / "manifest.jsonl");
  LoadedDataset ds = load_dataset(man);
  auto rows = evaluate(params, ds, threshold, hd95 ? 0.95 : 1.0);
  write_eval_csv(out_path, rows);
  double dice = 0.0, iou = 0.0;
  for (const EvalRow& r : rows) {
    dice += r.dice;
    iou += r.iou;
  }
  std::cout << "evaluated " << rows.size() << " images; mean dice "
            << csv_num(dice / double(rows.size())) << ", mean iou "
            << csv_num(iou / double(rows.size())) << "\n";
}

void cmd_report(const std::vector<std::string>& run_dirs,
                const std::string& out_dir) {
  std::vector<RunSummary> runs;
  for (const std::string& d : run_dirs) runs.push_back(read_run(d));

  fs::create_directories(out_dir);
  fs::path out(out_dir);

  // Ablation grid: mean of per-run means per (mode, lc) cell.
  {
    std::ofstream f(out / "ablation.csv", std::ios::binary);
    f << "mode,lc,mean_dice,mean_iou,mean_hd\n";
    for (LossMode mode : {LossMode::LB, LossMode::Exclusion, LossMode::MC})
      for (bool lc : {false, true}) {
        double dice = 0.0, iou = 0.0, hd = 0.0;
        int n = 0, hd_n = 0;
        for (const RunSummary& r : runs) {
          if (r.mode != mode || r.lc_enabled != lc) continue;
          dice += r.mean_dice;
          iou += r.mean_iou;
          if (r.hd_count) {
            hd += r.mean_hd;
            ++hd_n;
          }
          ++n;
        }
        if (!n) continue;
        f << to_string(mode) << ',' << (lc ? "true" : "false") << ','
          << csv_num(dice / n) << ',' << csv_num(iou / n) << ',';
        if (hd_n) f << csv_num(hd / hd_n);
        f << '\n';
      }
  }

  {
    std::ofstream f(out / "curves.csv", std::ios::binary);
    f << "curve,run,x,y\n";
    for (const RunSummary& r : runs)
      for (auto [epoch, acc] : r.label_accuracy)
        f << "label_accuracy," << r.label << ',' << epoch << ','
          << csv_num(acc) << '\n';
    for (const RunSummary& r : runs)
      f << "sigma_dice," << r.label << ',' << csv_num(r.sigma) << ','
        << csv_num(r.mean_dice) << '\n';
  }
  std::cout << "aggregated " << runs.size() << " runs into " << out_dir
            << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Box-supervised segmentation toolkit (synthetic benchmark)"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  std::string synth_out;
  std::uint64_t synth_seed = 0;
  DatasetOptions dopt;
  synth->add_option("--out", synth_out, "Output dataset directory")
      ->required();
  synth->add_option("--seed", synth_seed, "Generation seed");
  synth->add_option("--count", dopt.count, "Number of images");
  synth->add_option("--height", dopt.height, "Image height");
  synth->add_option("--width", dopt.width, "Image width");
  synth->add_option("--min-objects", dopt.min_objects, "Min objects per image");
  synth->add_option("--max-objects", dopt.max_objects, "Max objects per image");
  synth->add_option("--sigma", dopt.sigma, "Box noise level for noisy labels");
  synth->add_option("--min-size", dopt.min_size, "Min perturbed box size");

  // perturb
  auto* pert = app.add_subcommand("perturb", "Apply box noise to annotations");
  std::string pert_boxes, pert_manifest, pert_out;
  NoiseParams np;
  int pert_h = 0, pert_w = 0;
  pert->add_option("--in", pert_boxes, "Input boxes JSONL");
  pert->add_option("--manifest", pert_manifest, "Input manifest JSONL");
  pert->add_option("--out", pert_out, "Output path")->required();
  pert->add_option("--sigma", np.sigma, "Noise level")->required();
  pert->add_option("--seed", np.seed, "Noise seed");
  pert->add_option("--min-size", np.min_size, "Min perturbed box size");
  pert->add_option("--height", pert_h, "Image height (boxes mode)");
  pert->add_option("--width", pert_w, "Image width (boxes mode)");

  // train
  auto* tr = app.add_subcommand("train", "Train on a dataset");
  std::string tr_config, tr_data, tr_out;
  tr->add_option("--config", tr_config, "Config JSON path")->required();
  tr->add_option("--data", tr_data, "Dataset directory")->required();
  tr->add_option("--out", tr_out, "Run output directory")->required();

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint");
  std::string ev_ckpt, ev_data, ev_out;
  double ev_threshold = 0.5;
  bool ev_hd95 = false;
  ev->add_option("--checkpoint", ev_ckpt, "Checkpoint path")->required();
  ev->add_option("--data", ev_data, "Dataset directory")->required();
  ev->add_option("--out", ev_out, "Output CSV path")->required();
  ev->add_option("--threshold", ev_threshold, "Binarization threshold");
  ev->add_flag("--hd95", ev_hd95, "Report 95th-percentile HD");

  // report
  auto* rep = app.add_subcommand("report", "Aggregate run directories");
  std::vector<std::string> rep_runs;
  std::string rep_out;
  rep->add_option("--runs", rep_runs, "Run directories")
      ->required()
      ->expected(1, -1);
  rep->add_option("--out", rep_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*synth) cmd_synth(synth_out, synth_seed, dopt);
    if (*pert) cmd_perturb(pert_boxes, pert_manifest, pert_out, np, pert_h, pert_w);
    if (*tr) cmd_train(tr_config, tr_data, tr_out);
    if (*ev) cmd_eval(ev_ckpt, ev_data, ev_out, ev_threshold, ev_hd95);
    if (*rep) cmd_report(rep_runs, rep_out);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
