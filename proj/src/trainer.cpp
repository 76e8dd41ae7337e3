#include "monoseg/trainer.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "monoseg/rng.hpp"

namespace monoseg {

using nlohmann::json;

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(correction.tau > 0.0 && correction.tau < 1.0))
    throw std::invalid_argument("tau must be in (0,1)");
  if (correction.interval_epochs < 1)
    throw std::invalid_argument("correction interval must be >= 1");
  if (!(correction.lambda0 >= 0.0 && correction.lambda0 < 0.5))
    throw std::invalid_argument("lambda0 must be in [0, 0.5)");
  if (noise.sigma < 0.0) throw std::invalid_argument("sigma must be >= 0");
  if (noise.min_size < 1.0)
    throw std::invalid_argument("min_size must be >= 1");
  if (!(learning_rate > 0.0))
    throw std::invalid_argument("learning_rate must be positive");
  if (weight_decay < 0.0)
    throw std::invalid_argument("weight_decay must be >= 0");
  if (!(eval_threshold > 0.0 && eval_threshold < 1.0))
    throw std::invalid_argument("eval_threshold must be in (0,1)");
  if (cc_weight < 0.0 || mc_weight < 0.0)
    throw std::invalid_argument("loss weights must be >= 0");
  if (image_bias_lr < 0.0)
    throw std::invalid_argument("image_bias_lr must be >= 0");
}

namespace {

template <typename T>
void take(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

TrainConfig train_config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config must be an object");
  if (!j.contains("schema_version"))
    throw std::invalid_argument("config missing schema_version");
  if (j.at("schema_version").get<int>() != 1)
    throw std::invalid_argument("unsupported config schema_version");

  static const char* known[] = {
      "schema_version", "epochs",        "batch_size",    "mode",
      "lc_enabled",     "tau",           "correction_interval",
      "lambda0",        "merge_rule",    "sigma",         "noise_seed",
      "min_size",       "seed",          "mc_normalized", "cc_weight",
      "mc_weight",      "learning_rate", "weight_decay",  "eval_threshold",
      "image_bias_lr"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw std::invalid_argument("unknown config key: " + it.key());
  }

  TrainConfig c;
  take(j, "epochs", c.epochs);
  take(j, "batch_size", c.batch_size);
  if (j.contains("mode"))
    c.mode = loss_mode_from_string(j.at("mode").get<std::string>());
  take(j, "lc_enabled", c.lc_enabled);
  take(j, "tau", c.correction.tau);
  take(j, "correction_interval", c.correction.interval_epochs);
  take(j, "lambda0", c.correction.lambda0);
  if (j.contains("merge_rule"))
    c.correction.merge_rule =
        merge_rule_from_string(j.at("merge_rule").get<std::string>());
  take(j, "sigma", c.noise.sigma);
  take(j, "noise_seed", c.noise.seed);
  take(j, "min_size", c.noise.min_size);
  take(j, "seed", c.seed);
  take(j, "mc_normalized", c.mc_normalized);
  take(j, "cc_weight", c.cc_weight);
  take(j, "mc_weight", c.mc_weight);
  take(j, "learning_rate", c.learning_rate);
  take(j, "weight_decay", c.weight_decay);
  take(j, "eval_threshold", c.eval_threshold);
  take(j, "image_bias_lr", c.image_bias_lr);
  c.validate();
  return c;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return train_config_from_json_text(ss.str());
}

std::string train_config_to_json_text(const TrainConfig& cfg) {
  json j{{"schema_version", 1},
         {"epochs", cfg.epochs},
         {"batch_size", cfg.batch_size},
         {"mode", to_string(cfg.mode)},
         {"lc_enabled", cfg.lc_enabled},
         {"tau", cfg.correction.tau},
         {"correction_interval", cfg.correction.interval_epochs},
         {"lambda0", cfg.correction.lambda0},
         {"merge_rule", to_string(cfg.correction.merge_rule)},
         {"sigma", cfg.noise.sigma},
         {"noise_seed", cfg.noise.seed},
         {"min_size", cfg.noise.min_size},
         {"seed", cfg.seed},
         {"mc_normalized", cfg.mc_normalized},
         {"cc_weight", cfg.cc_weight},
         {"mc_weight", cfg.mc_weight},
         {"learning_rate", cfg.learning_rate},
         {"weight_decay", cfg.weight_decay},
         {"eval_threshold", cfg.eval_threshold},
         {"image_bias_lr", cfg.image_bias_lr}};
  return j.dump(2) + "\n";
}

LoadedDataset load_dataset(const Manifest& manifest) {
  LoadedDataset d;
  d.height = manifest.height;
  d.width = manifest.width;
  for (const ManifestEntry& e : manifest.entries) {
    LoadedImage li;
    li.image_id = e.image_id;
    li.image = read_pgm_image(manifest.resolve(e.image_path));
    li.gt_mask = read_pgm_mask(manifest.resolve(e.mask_path));
    require_same_shape(li.image.rows(), li.image.cols(), manifest.height,
                       manifest.width);
    li.features = compute_features(li.image);
    li.clean_boxes = e.clean_boxes;
    li.boxes = e.noisy_boxes;
    d.images.push_back(std::move(li));
  }
  return d;
}

namespace {

void add_breakdown(LossBreakdown& acc, const LossBreakdown& x, double w) {
  acc.cc += w * x.cc;
  acc.mc_left += w * x.mc_left;
  acc.mc_right += w * x.mc_right;
  acc.mc_top += w * x.mc_top;
  acc.mc_bottom += w * x.mc_bottom;
  acc.mc_total += w * x.mc_total;
  acc.total += w * x.total;
}

void add_params(ModelParams& acc, const ModelParams& g, double w) {
  for (std::size_t k = 0; k < acc.w1.size(); ++k) acc.w1[k] += w * g.w1[k];
  for (std::size_t k = 0; k < acc.b1.size(); ++k) acc.b1[k] += w * g.b1[k];
  for (std::size_t k = 0; k < acc.w2.size(); ++k) acc.w2[k] += w * g.w2[k];
  acc.b2 += w * g.b2;
}

double dataset_label_accuracy(const LoadedDataset& d) {
  double sum = 0.0;
  for (const LoadedImage& li : d.images)
    sum += label_accuracy(li.boxes, li.clean_boxes);
  return sum / double(d.images.size());
}

}  // namespace

RunReport train(const TrainConfig& cfg, LoadedDataset& data) {
  cfg.validate();
  if (data.images.empty()) throw std::invalid_argument("empty dataset");

  if (cfg.noise.sigma > 0.0) {
    std::vector<BoxRecord> clean;
    for (const LoadedImage& li : data.images)
      clean.push_back({li.image_id, li.clean_boxes});
    std::vector<BoxRecord> noisy =
        perturb_dataset(clean, cfg.noise, data.height, data.width);
    for (std::size_t i = 0; i < data.images.size(); ++i)
      data.images[i].boxes = noisy[i].boxes;
  }

  RunReport report;
  ModelParams params = init_params(cfg.seed);
  OptimizerState opt;
  opt.learning_rate = cfg.learning_rate;
  opt.weight_decay = cfg.weight_decay;
  double lambda = cfg.correction.lambda0;
  int global_step = 0;

  LossOptions lopt;
  lopt.mode = cfg.mode;
  lopt.mc_normalized = cfg.mc_normalized;
  lopt.cc_weight = cfg.cc_weight;
  lopt.mc_weight = cfg.mc_weight;

  std::vector<int> order(data.images.size());
  std::iota(order.begin(), order.end(), 0);

  // Per-image score offsets, applied pre-sigmoid like an extra output bias.
  // They absorb the per-image part of the annotation noise so correction-time
  // predictions line up with the boxes they are matched against; evaluation
  // and test-time inference never see them.
  std::vector<double> img_bias(data.images.size(), 0.0);
  auto biased = [&](int idx) {
    ModelParams p = params;
    p.b2 += img_bias[std::size_t(idx)];
    return p;
  };

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    SplitMix64 sh(derive_key(cfg.seed, hash_str("shuffle"), epoch));
    sh.shuffle(order);

    LossBreakdown epoch_sum;
    int epoch_steps = 0;
    for (std::size_t start = 0; start < order.size();
         start += std::size_t(cfg.batch_size)) {
      std::size_t end =
          std::min(order.size(), start + std::size_t(cfg.batch_size));
      double inv = 1.0 / double(end - start);
      ModelParams grads;
      LossBreakdown batch_loss;
      std::vector<std::pair<int, double>> bias_grads;
      for (std::size_t k = start; k < end; ++k) {
        int idx = order[k];
        LoadedImage& li = data.images[std::size_t(idx)];
        ModelParams pk = biased(idx);
        ScoreMap m = model_forward(li.features, pk);
        lopt.lambda = lambda;
        TotalLossResult tl = total_loss(m, li.boxes, lopt);
        add_breakdown(batch_loss, tl.breakdown, inv);
        ModelParams g = model_backward(li.features, pk, tl.grad_m);
        add_params(grads, g, inv);
        bias_grads.emplace_back(idx, g.b2);  // d loss / d offset == d/d b2
      }
      optimizer_step(params, grads, opt);
      for (const auto& [idx, g] : bias_grads)
        img_bias[std::size_t(idx)] -= cfg.image_bias_lr * g;
      report.steps.push_back({++global_step, batch_loss});
      add_breakdown(epoch_sum, batch_loss, 1.0);
      ++epoch_steps;
    }

    if (cfg.lc_enabled && epoch % cfg.correction.interval_epochs == 0) {
      double next_lambda = lambda_schedule(lambda);
      for (int idx = 0; idx < int(data.images.size()); ++idx) {
        LoadedImage& li = data.images[std::size_t(idx)];
        ScoreMap score = model_forward(li.features, biased(idx));
        std::vector<Box> preds = predicted_boxes(score, cfg.eval_threshold);
        MatchResult mr = match_and_merge(li.boxes, preds, cfg.correction.tau,
                                         cfg.correction.merge_rule);
        CorrectionEvent ev;
        ev.epoch = epoch;
        ev.image_id = li.image_id;
        ev.pairs = mr.pairs;
        ev.boxes_before = li.boxes;
        ev.boxes_after = mr.corrected;
        ev.lambda_before = lambda;
        ev.lambda_after = next_lambda;
        report.events.push_back(std::move(ev));
        li.boxes = mr.corrected;
      }
      lambda = next_lambda;
    }

    EpochStats es;
    es.epoch = epoch;
    es.mean_loss = LossBreakdown{};
    add_breakdown(es.mean_loss, epoch_sum, 1.0 / double(epoch_steps));
    es.label_accuracy = dataset_label_accuracy(data);
    es.lambda = lambda;
    report.epochs.push_back(es);
  }

  report.final_params = params;
  report.image_biases = img_bias;
  return report;
}

std::vector<EvalRow> evaluate(const ModelParams& params,
                              const LoadedDataset& data, double threshold,
                              double hd_percentile) {
  std::vector<EvalRow> rows;
  for (const LoadedImage& li : data.images) {
    ScoreMap m = model_forward(li.features, params);
    BinaryMask pred(m.rows(), m.cols(), 0);
    for (std::size_t k = 0; k < m.size(); ++k)
      pred.values()[k] = m.values()[k] > threshold ? 1 : 0;
    EvalRow r;
    r.image_id = li.image_id;
    r.dice = mask_dice(pred, li.gt_mask);
    r.iou = mask_iou(pred, li.gt_mask);
    try {
      r.hd = hausdorff_distance(pred, li.gt_mask, hd_percentile);
    } catch (const std::invalid_argument&) {
      r.hd.reset();  // empty prediction or empty GT: HD undefined
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);  // LF line endings everywhere
  if (!out)
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

void put_breakdown(std::ostream& out, const LossBreakdown& b) {
  out << csv_num(b.cc) << ',' << csv_num(b.mc_left) << ','
      << csv_num(b.mc_right) << ',' << csv_num(b.mc_top) << ','
      << csv_num(b.mc_bottom) << ',' << csv_num(b.mc_total) << ','
      << csv_num(b.total);
}

json box_json(const Box& b) {
  return json{{"x_lt", b.x_lt}, {"y_lt", b.y_lt}, {"x_rb", b.x_rb}, {"y_rb", b.y_rb}};
}

}  // namespace

void write_steps_csv(const std::filesystem::path& path, const RunReport& r,
                     LossMode mode) {
  std::ofstream out = open_out(path);
  out << "step,mode,cc,mc_l,mc_r,mc_t,mc_b,mc_total,total\n";
  for (const StepStats& s : r.steps) {
    out << s.step << ',' << to_string(mode) << ',';
    put_breakdown(out, s.loss);
    out << '\n';
  }
}

void write_epochs_csv(const std::filesystem::path& path, const RunReport& r,
                      LossMode mode) {
  std::ofstream out = open_out(path);
  out << "epoch,mode,cc,mc_l,mc_r,mc_t,mc_b,mc_total,total,label_accuracy,"
         "lambda\n";
  for (const EpochStats& e : r.epochs) {
    out << e.epoch << ',' << to_string(mode) << ',';
    put_breakdown(out, e.mean_loss);
    out << ',' << csv_num(e.label_accuracy) << ',' << csv_num(e.lambda)
        << '\n';
  }
}

void write_events_jsonl(const std::filesystem::path& path,
                        const RunReport& r) {
  std::ofstream out = open_out(path);
  for (const CorrectionEvent& ev : r.events) {
    json pairs = json::array();
    for (const MatchPair& p : ev.pairs)
      pairs.push_back({{"label_index", p.label_index},
                       {"pred_index", p.pred_index},
                       {"iou", p.iou}});
    json before = json::array(), after = json::array();
    for (const Box& b : ev.boxes_before) before.push_back(box_json(b));
    for (const Box& b : ev.boxes_after) after.push_back(box_json(b));
    json row{{"epoch", ev.epoch},
             {"image_id", ev.image_id},
             {"pairs", pairs},
             {"boxes_before", before},
             {"boxes_after", after},
             {"lambda_before", ev.lambda_before},
             {"lambda_after", ev.lambda_after}};
    out << row.dump() << '\n';
  }
}

void write_eval_csv(const std::filesystem::path& path,
                    const std::vector<EvalRow>& rows) {
  std::ofstream out = open_out(path);
  out << "image_id,dice,iou,hd\n";
  for (const EvalRow& r : rows) {
    out << r.image_id << ',' << csv_num(r.dice) << ',' << csv_num(r.iou)
        << ',';
    if (r.hd) out << csv_num(*r.hd);
    out << '\n';
  }
}

}  // namespace monoseg
