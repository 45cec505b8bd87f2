// Copyright 2026 The negcf Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "negcf/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "negcf/synth.hpp"

namespace negcf {

namespace fs = std::filesystem;

PreparedData prepare_data(const RunConfig& config) {
  PreparedData d;
  if (config.data.source == DataSource::kSynth) {
    LatentWorld world =
        generate_world(config.synth.users, config.synth.items, config.synth.dim,
                       config.synth.scale, config.synth.seed);
    Rng rng = stream_rng(config.synth.seed, 1);
    d.full = sample_interactions(world, config.synth.per_user, rng);
  } else {
    d.full = parse_interactions(config.data.path, config.data.format,
                                config.data.rating_threshold);
  }
  d.manifest = split_dataset(d.full, config.split.test_frac,
                             config.split.val_frac, config.split.seed);
  d.train = dataset_from_pairs(d.full.num_users, d.full.num_items,
                               d.manifest.train);
  d.val_positives = positives_by_user(d.full.num_users, d.manifest.val);
  d.test_positives = positives_by_user(d.full.num_users, d.manifest.test);
  return d;
}

namespace {

// Processes batches [batch_begin, batch_end) of the shuffled order.
// Returns the summed loss over its triples.
double run_batches(EmbeddingModel& model, const InteractionDataset& train,
                   const Sampler& sampler, const AdamParams& hp,
                   AdamState& user_state, AdamState& item_state,
                   const std::vector<std::int64_t>& order, int batch_size,
                   std::int64_t batch_begin, std::int64_t batch_end, Rng& rng,
                   SelectionAccumulator& acc) {
  const std::int64_t n = static_cast<std::int64_t>(order.size());
  RowGradients user_grads(model.user_factors.rows(), model.dim);
  RowGradients item_grads(model.item_factors.rows(), model.dim);
  double loss_sum = 0.0;
  for (std::int64_t b = batch_begin; b < batch_end; ++b) {
    const std::int64_t start = b * batch_size;
    const std::int64_t stop = std::min<std::int64_t>(n, start + batch_size);
    user_grads.clear();
    item_grads.clear();
    for (std::int64_t k = start; k < stop; ++k) {
      const Interaction& t = train.interactions[order[k]];
      const SampledNegative sel = sampler.sample(model, t.user, t.item, rng);
      acc.record_selection(t.user, t.item, sel);
      const double s_pos = model.score(t.user, t.item);
      const double s_neg = sel.score_at_selection;
      const double c = bpr_sigma(s_pos, s_neg);
      loss_sum += bpr_loss(s_pos, s_neg);
      user_grads.accumulate(t.user, c, model.item_factors.row(sel.item));
      user_grads.accumulate(t.user, -c, model.item_factors.row(t.item));
      item_grads.accumulate(t.item, -c, model.user_factors.row(t.user));
      item_grads.accumulate(sel.item, c, model.user_factors.row(t.user));
    }
    const double inv = 1.0 / static_cast<double>(stop - start);
    user_grads.scale_all(inv);
    item_grads.scale_all(inv);
    adam_step(model.user_factors, user_grads, user_state, hp);
    adam_step(model.item_factors, item_grads, item_state, hp);
  }
  return loss_sum;
}

}  // namespace

EpochStats train_epoch(EmbeddingModel& model, const InteractionDataset& train,
                       const Sampler& sampler, const AdamParams& hp,
                       AdamState& user_state, AdamState& item_state,
                       int batch_size, bool deterministic, int workers,
                       std::uint64_t train_seed, int epoch_index,
                       SelectionAccumulator& acc) {
  if (train.interactions.empty()) {
    throw ContractError("train_epoch on an empty training set");
  }
  if (batch_size < 1) {
    throw ContractError("batch_size must be >= 1");
  }
  const auto t0 = std::chrono::steady_clock::now();

  const std::int64_t n = train.total_interactions();
  std::vector<std::int64_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng epoch_rng = stream_rng(train_seed, static_cast<std::uint64_t>(epoch_index));
  std::shuffle(order.begin(), order.end(), epoch_rng);

  const std::int64_t total_batches = (n + batch_size - 1) / batch_size;
  double loss_sum = 0.0;

  if (deterministic || workers <= 1) {
    loss_sum = run_batches(model, train, sampler, hp, user_state, item_state,
                           order, batch_size, 0, total_batches, epoch_rng, acc);
  } else {
    // Hogwild-style: contiguous batch ranges per worker, unsynchronized row
    // updates on the shared matrices. Permitted to be nondeterministic.
    const std::int64_t w_count =
        std::min<std::int64_t>(workers, total_batches);
    const std::int64_t per =
        (total_batches + w_count - 1) / w_count;
    std::vector<double> worker_loss(static_cast<std::size_t>(w_count), 0.0);
    std::vector<SelectionAccumulator> worker_acc;
    worker_acc.reserve(static_cast<std::size_t>(w_count));
    for (std::int64_t w = 0; w < w_count; ++w) {
      worker_acc.emplace_back(acc.test_positives(), acc.tracking_selected());
    }
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(w_count));
    for (std::int64_t w = 0; w < w_count; ++w) {
      threads.emplace_back([&, w] {
        const std::int64_t begin = w * per;
        const std::int64_t end =
            std::min<std::int64_t>(total_batches, begin + per);
        Rng rng = stream_rng(
            train_seed, (static_cast<std::uint64_t>(epoch_index) << 20) + 1 +
                            static_cast<std::uint64_t>(w));
        worker_loss[static_cast<std::size_t>(w)] = run_batches(
            model, train, sampler, hp, user_state, item_state, order,
            batch_size, begin, end, rng, worker_acc[static_cast<std::size_t>(w)]);
      });
    }
    for (auto& t : threads) t.join();
    for (std::int64_t w = 0; w < w_count; ++w) {
      loss_sum += worker_loss[static_cast<std::size_t>(w)];
      acc.merge(worker_acc[static_cast<std::size_t>(w)]);
    }
  }

  EpochStats stats;
  stats.batches = static_cast<int>(total_batches);
  stats.mean_loss = loss_sum / static_cast<double>(n);
  stats.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return stats;
}

namespace {

std::vector<int> eval_ks(const RunConfig& config) {
  std::vector<int> ks = config.eval.ks;
  ks.push_back(20);
  ks.push_back(50);
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  return ks;
}

RankingMetrics metrics_from(const EvalResult& ev) {
  RankingMetrics m;
  m.recall20 = ev.recall_at(20);
  m.ndcg20 = ev.ndcg_at(20);
  m.ndcg50 = ev.ndcg_at(50);
  return m;
}

}  // namespace

RunResult run_training(const RunConfig& config, const PreparedData& data,
                       const RunOptions& options) {
  config.validate();
  const int eval_every = options.eval_every_override.value_or(config.eval.every);
  const std::vector<int> ks = eval_ks(config);

  EmbeddingModel model = xavier_init(data.full.num_users, data.full.num_items,
                                     config.model.dim, config.model.init_seed);
  Sampler sampler(config.sampler, data.train);
  AdamState user_state(data.full.num_users, config.model.dim);
  AdamState item_state(data.full.num_items, config.model.dim);
  SelectionAccumulator acc(&data.test_positives, options.track_selected);

  RunResult res;
  res.report.reserve(static_cast<std::size_t>(config.training.epochs));
  for (int epoch = 0; epoch < config.training.epochs; ++epoch) {
    EpochStats stats = train_epoch(
        model, data.train, sampler, config.optimizer, user_state, item_state,
        config.training.batch_size, config.training.deterministic,
        config.training.workers, config.training.seed, epoch, acc);

    const bool last = (epoch + 1 == config.training.epochs);
    const bool do_eval = last || ((epoch + 1) % eval_every == 0);
    std::optional<RankingMetrics> metrics;
    if (do_eval) {
      EvalResult ev = evaluate_model(model, data.train.user_positives,
                                     data.test_positives, ks);
      metrics = metrics_from(ev);
      if (last) res.final_test = ev;
    }
    if (options.track_selected) {
      res.fpp_series.push_back(
          fpp_rate(model, data.train, acc.selected_by_user(), 20));
    }
    const double reported_seconds =
        config.training.deterministic ? 0.0 : stats.seconds;
    res.report.push_back(acc.finalize_epoch(epoch, stats.batches,
                                            stats.mean_loss, metrics,
                                            reported_seconds));
    res.epoch_seconds.push_back(stats.seconds);
    if (do_eval) {
      log_info("epoch " + std::to_string(epoch + 1) + "/" +
               std::to_string(config.training.epochs) +
               " loss=" + double_repr(stats.mean_loss) +
               " ndcg20=" + double_repr(metrics->ndcg20));
    } else {
      log_debug("epoch " + std::to_string(epoch + 1) +
                " loss=" + double_repr(stats.mean_loss));
    }
  }
  if (!data.manifest.val.empty()) {
    res.final_val = evaluate_model(model, data.train.user_positives,
                                   data.val_positives, ks);
  }
  res.model = std::move(model);
  return res;
}

namespace {

void write_timing_csv(const std::vector<double>& seconds, const fs::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write timing file: " + path.string());
  }
  out << "epoch,seconds\n";
  for (std::size_t e = 0; e < seconds.size(); ++e) {
    out << e << ',' << double_repr(seconds[e]) << "\n";
  }
  if (!out) {
    throw IoError("error while writing timing file: " + path.string());
  }
}

nlohmann::json eval_to_json(const EvalResult& ev) {
  nlohmann::json j;
  j["users_evaluated"] = ev.users_evaluated;
  j["recall"] = nlohmann::json::object();
  j["ndcg"] = nlohmann::json::object();
  for (const auto& [k, v] : ev.recall) j["recall"][std::to_string(k)] = v;
  for (const auto& [k, v] : ev.ndcg) j["ndcg"][std::to_string(k)] = v;
  return j;
}

void write_metrics_json(const RunResult& res, const fs::path& path) {
  nlohmann::json doc;
  doc["test"] = eval_to_json(res.final_test);
  doc["val"] = res.final_val.has_value() ? eval_to_json(*res.final_val)
                                         : nlohmann::json();
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write metrics file: " + path.string());
  }
  out << doc.dump(2) << "\n";
}

void write_reports(const RunConfig& config, const RunResult& res,
                   const fs::path& dir) {
  RunReportHeader header;
  header.config_hash = config_hash_hex(config);
  header.seed = config.training.seed;
  header.tool_version = kToolVersion;
  header.sampler = config.sampler.to_string();
  emit_run_report(res.report, dir / "report.csv", ReportFormat::kCsv, &header);
  emit_run_report(res.report, dir / "report.json", ReportFormat::kJson,
                  &header);
  write_timing_csv(res.epoch_seconds, dir / "timing.csv");
  write_metrics_json(res, dir / "metrics.json");
}

}  // namespace

RunResult execute_train(const RunConfig& config) {
  config.validate();
  const fs::path out(config.output.dir);
  fs::create_directories(out);
  PreparedData data = prepare_data(config);
  save_config(config, out / "config.ini");
  save_manifest(data.manifest, out / "manifest.txt");
  RunResult res = run_training(config, data);
  save_checkpoint(res.model, out / "checkpoint.bin");
  write_reports(config, res, out);
  return res;
}

EvalResult execute_evaluate(const RunConfig& config,
                            const std::filesystem::path& checkpoint) {
  config.validate();
  PreparedData data = prepare_data(config);
  EmbeddingModel model = load_checkpoint(checkpoint);
  if (model.user_factors.rows() != data.full.num_users ||
      model.item_factors.rows() != data.full.num_items) {
    throw ContractError(
        "checkpoint shape does not match the config's dataset");
  }
  return evaluate_model(model, data.train.user_positives, data.test_positives,
                        eval_ks(config));
}

void execute_generate(const RunConfig& config,
                      const std::filesystem::path& out_path) {
  config.validate();
  LatentWorld world =
      generate_world(config.synth.users, config.synth.items, config.synth.dim,
                     config.synth.scale, config.synth.seed);
  Rng rng = stream_rng(config.synth.seed, 1);
  InteractionDataset ds = sample_interactions(world, config.synth.per_user, rng);
  if (out_path.has_parent_path()) {
    fs::create_directories(out_path.parent_path());
  }
  write_dataset_csv(ds, out_path);
}

namespace {

std::string sanitize_dirname(const std::string& name) {
  std::string out;
  out.reserve(name.size());
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '.' || c == '-' || c == '_';
    out += ok ? c : '_';
  }
  return out;
}

std::optional<double> hardness_series_slope(
    const std::vector<EpochTelemetry>& report, double window_fraction) {
  std::vector<double> series;
  for (const EpochTelemetry& row : report) {
    if (row.hardness.has_value()) series.push_back(row.hardness->mean);
  }
  const std::size_t window = static_cast<std::size_t>(
      std::ceil(window_fraction * static_cast<double>(series.size())));
  if (std::min(window, series.size()) < 2) return std::nullopt;
  return trend_slope(series, window_fraction);
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) /
         static_cast<double>(v.size());
}

void write_fpp_csv(const std::vector<double>& fpp, const fs::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write fpp file: " + path.string());
  }
  out << "epoch,fpp20\n";
  for (std::size_t e = 0; e < fpp.size(); ++e) {
    out << e << ',' << double_repr(fpp[e]) << "\n";
  }
}

}  // namespace

std::vector<DiagnoseSamplerSummary> execute_diagnose(const RunConfig& config) {
  config.validate();
  if (config.diagnose.samplers.empty()) {
    throw ConfigError("[diagnose] samplers must list at least one sampler");
  }
  const fs::path out(config.output.dir);
  fs::create_directories(out);
  PreparedData data = prepare_data(config);
  save_config(config, out / "config.ini");
  save_manifest(data.manifest, out / "manifest.txt");

  std::vector<DiagnoseSamplerSummary> summaries;
  nlohmann::json jlist = nlohmann::json::array();
  for (const SamplerSpec& spec : config.diagnose.samplers) {
    RunConfig rc = config;
    rc.sampler = spec;
    RunOptions opt;
    opt.track_selected = true;
    opt.eval_every_override = 1;
    log_info("diagnose: training " + spec.to_string());
    RunResult res = run_training(rc, data, opt);

    const fs::path sdir = out / sanitize_dirname(spec.to_string());
    fs::create_directories(sdir);
    write_reports(rc, res, sdir);
    write_fpp_csv(res.fpp_series, sdir / "fpp.csv");

    DiagnoseSamplerSummary s;
    s.sampler = spec.to_string();
    s.final_metrics = *res.report.back().metrics;
    s.hardness_slope =
        hardness_series_slope(res.report, config.diagnose.window_fraction);
    std::vector<double> fn;
    fn.reserve(res.report.size());
    for (const EpochTelemetry& row : res.report) {
      fn.push_back(row.false_negative_rate);
    }
    s.mean_fn_rate = mean_of(fn);
    s.mean_seconds = mean_of(res.epoch_seconds);
    s.final_fpp = res.fpp_series.back();
    summaries.push_back(s);

    nlohmann::json js;
    js["sampler"] = s.sampler;
    js["recall20"] = s.final_metrics.recall20;
    js["ndcg20"] = s.final_metrics.ndcg20;
    js["ndcg50"] = s.final_metrics.ndcg50;
    js["hardness_slope"] = s.hardness_slope.has_value()
                               ? nlohmann::json(*s.hardness_slope)
                               : nlohmann::json();
    js["mean_fn_rate"] = s.mean_fn_rate;
    js["mean_seconds"] = s.mean_seconds;
    js["final_fpp20"] = s.final_fpp;
    jlist.push_back(js);
  }

  nlohmann::json doc;
  doc["tool_version"] = kToolVersion;
  doc["config_hash"] = config_hash_hex(config);
  doc["seed"] = config.training.seed;
  doc["window_fraction"] = config.diagnose.window_fraction;
  doc["samplers"] = jlist;
  std::ofstream sout(out / "summary.json");
  if (!sout) {
    throw IoError("cannot write diagnose summary");
  }
  sout << doc.dump(2) << "\n";
  return summaries;
}

namespace {

RankingMetrics metrics_from_json(const nlohmann::json& j) {
  RankingMetrics m;
  m.recall20 = j.at("recall").at("20").get<double>();
  m.ndcg20 = j.at("ndcg").at("20").get<double>();
  m.ndcg50 = j.at("ndcg").at("50").get<double>();
  return m;
}

std::string csv_safe(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

std::vector<SweepCell> execute_sweep(const RunConfig& base,
                                     const SweepGrid& grid) {
  base.validate();
  const std::vector<double> alphas =
      grid.alphas.empty() ? std::vector<double>{base.sampler.alpha}
                          : grid.alphas;
  const std::vector<double> betas =
      grid.betas.empty() ? std::vector<double>{base.sampler.beta} : grid.betas;
  const std::vector<double> ps =
      grid.ps.empty() ? std::vector<double>{base.sampler.p} : grid.ps;
  const std::vector<int> ms =
      grid.ms.empty() ? std::vector<int>{base.sampler.m} : grid.ms;

  const fs::path root(base.output.dir);
  fs::create_directories(root);

  std::vector<SweepCell> cells;
  for (double a : alphas) {
    for (double b : betas) {
      for (double p : ps) {
        for (int m : ms) {
          SweepCell cell;
          cell.alpha = a;
          cell.beta = b;
          cell.p = p;
          cell.m = m;
          const std::string name = "a" + double_repr(a) + "_b" +
                                   double_repr(b) + "_p" + double_repr(p) +
                                   "_m" + std::to_string(m);
          const fs::path cell_dir = root / sanitize_dirname(name);
          const fs::path metrics_path = cell_dir / "metrics.json";
          try {
            if (fs::exists(metrics_path)) {
              std::ifstream in(metrics_path);
              nlohmann::json doc = nlohmann::json::parse(in);
              cell.test = metrics_from_json(doc.at("test"));
              if (!doc.at("val").is_null()) {
                cell.val = metrics_from_json(doc.at("val"));
              }
              cell.ok = true;
              log_info("sweep: " + name + " already done, skipping");
            } else {
              RunConfig rc = base;
              rc.sampler.alpha = a;
              rc.sampler.beta = b;
              rc.sampler.p = p;
              rc.sampler.m = m;
              rc.output.dir = cell_dir.string();
              log_info("sweep: running " + name);
              RunResult res = execute_train(rc);
              cell.test = metrics_from(res.final_test);
              if (res.final_val.has_value()) {
                cell.val = metrics_from(*res.final_val);
              }
              cell.ok = true;
            }
          } catch (const Error& e) {
            cell.ok = false;
            cell.error = e.what();
            log_info("sweep: " + name + " failed: " + cell.error);
          }
          cells.push_back(cell);
        }
      }
    }
  }

  std::ofstream out(root / "sweep.csv");
  if (!out) {
    throw IoError("cannot write sweep results");
  }
  out << "alpha,beta,p,m,status,recall20,ndcg20,ndcg50,"
         "val_recall20,val_ndcg20,val_ndcg50,error\n";
  for (const SweepCell& c : cells) {
    out << double_repr(c.alpha) << ',' << double_repr(c.beta) << ','
        << double_repr(c.p) << ',' << c.m << ','
        << (c.ok ? "ok" : "failed") << ',';
    if (c.ok) {
      out << double_repr(c.test.recall20) << ',' << double_repr(c.test.ndcg20)
          << ',' << double_repr(c.test.ndcg50) << ','
          << double_repr(c.val.recall20) << ',' << double_repr(c.val.ndcg20)
          << ',' << double_repr(c.val.ndcg50) << ',';
    } else {
      out << ",,,,,,";
    }
    out << csv_safe(c.error) << "\n";
  }
  return cells;
}

}  // namespace negcf
