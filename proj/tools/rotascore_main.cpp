// Command-line front end: synthetic data generation, CSV ingestion, training,
// evaluation, the three-way position-encoding comparison, and gradient
// checking. Exit codes: 0 success, 1 usage error, 2 data error, 3 internal
// consistency failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rotascore/checkpoint.hpp"
#include "rotascore/config.hpp"
#include "rotascore/data.hpp"
#include "rotascore/dataset.hpp"
#include "rotascore/errors.hpp"
#include "rotascore/gradcheck.hpp"
#include "rotascore/graph.hpp"
#include "rotascore/loss.hpp"
#include "rotascore/rng.hpp"
#include "rotascore/synthetic.hpp"
#include "rotascore/train.hpp"

namespace rs = rotascore;

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw rs::DataError("cannot write file: " + path);
  out << text;
  if (!out.flush()) throw rs::DataError("write failed: " + path);
}

long long count_positives(const rs::Dataset& ds, const std::vector<int>& idx) {
  long long n = 0;
  for (int i : idx) n += ds.sequences[static_cast<std::size_t>(i)].label();
  return n;
}

int run_synth(const std::string& out_path, const rs::SynthConfig& cfg) {
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw rs::UsageError(e.what());
  }
  const rs::Dataset ds = rs::generate_synthetic(cfg);
  rs::save_dataset(ds, out_path);
  long long pos = 0;
  for (const auto& seq : ds.sequences) pos += seq.label();
  std::printf("wrote %s: %zu sequences, %lld positive (rate %.4f), feature_dim %d\n",
              out_path.c_str(), ds.sequences.size(), pos,
              static_cast<double>(pos) / static_cast<double>(ds.sequences.size()), ds.feature_dim);
  return 0;
}

int run_ingest(const std::string& tx_path, const std::string& id_path,
               const std::string& config_path, const std::string& out_path) {
  const rs::AppConfig cfg = rs::load_config(config_path);
  const rs::RecordTable records = rs::load_transactions(tx_path, id_path);
  const auto raw = rs::build_sequences(records, cfg.data.grouping, cfg.encoder.max_seq_len);
  if (raw.empty()) throw rs::DataError("ingest: no sequences built from " + tx_path);

  // Split first so schema statistics are fitted on the training side only.
  std::vector<std::string> ids;
  ids.reserve(raw.size());
  for (const auto& r : raw) ids.push_back(r.entity_id);
  const auto sides = rs::split_sides(ids, cfg.train.valid_fraction, cfg.train.seed);
  std::vector<rs::RawSequence> train_raw;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (sides[i] == 0) train_raw.push_back(raw[i]);
  }
  if (train_raw.empty()) throw rs::DataError("ingest: training side of the split is empty");

  const rs::FeatureSchema schema = rs::fit_schema(records, train_raw, cfg.data.hash_buckets);
  rs::Dataset ds;
  ds.feature_dim = schema.feature_dim();
  ds.sequences = rs::featurize(records, raw, schema);
  ds.split_tags = sides;
  rs::save_dataset(ds, out_path);

  long long pos[2] = {0, 0}, tot[2] = {0, 0};
  for (std::size_t i = 0; i < ds.sequences.size(); ++i) {
    pos[sides[i]] += ds.sequences[i].label();
    tot[sides[i]] += 1;
  }
  std::printf("wrote %s: %zu rows -> %zu sequences, feature_dim %d\n", out_path.c_str(),
              records.rows.size(), ds.sequences.size(), ds.feature_dim);
  std::printf("split: train %lld sequences (%lld positive), valid %lld sequences (%lld positive)\n",
              tot[0], pos[0], tot[1], pos[1]);
  for (int side = 0; side < 2; ++side) {
    if (pos[side] == 0) {
      std::fprintf(stderr, "warning: %s side has zero positive labels\n",
                   side == 0 ? "train" : "valid");
    }
  }
  return 0;
}

int run_train(const std::string& data_path, const std::string& config_path,
              const std::string& mode_str, const std::string& out_path) {
  rs::AppConfig cfg = rs::load_config(config_path);
  if (!mode_str.empty()) {
    const auto mode = rs::parse_position_mode(mode_str);
    if (!mode) throw rs::UsageError("unknown position mode '" + mode_str + "'");
    cfg.encoder.mode = *mode;
  }
  const rs::Dataset ds = rs::load_dataset(data_path);
  const rs::SplitIndices split = rs::resolve_split(ds, cfg.train.valid_fraction, cfg.train.seed);
  if (split.train.empty()) throw rs::DataError("train: empty training split");
  const auto train_set = rs::gather(ds, split.train);
  const auto valid_set = rs::gather(ds, split.valid);

  const rs::TrainResult result = rs::train(train_set, valid_set, cfg.encoder, cfg.train);

  rs::Checkpoint ckpt;
  ckpt.config = cfg.encoder;
  ckpt.params = result.params;
  ckpt.train_seed = cfg.train.seed;
  ckpt.valid_fraction = cfg.train.valid_fraction;
  rs::save_checkpoint(ckpt, out_path);
  write_text(out_path + ".history.tsv", rs::history_to_tsv(result.history, /*include_wall_time=*/true));

  std::printf("mode %s, pos_weight %.6f, %zu train / %zu valid sequences\n",
              rs::to_string(cfg.encoder.mode), result.pos_weight, train_set.size(),
              valid_set.size());
  std::fputs(rs::history_to_tsv(result.history, true).c_str(), stdout);
  if (result.best_epoch >= 0) {
    std::printf("best epoch %d (valid AUC %.6f); checkpoint %s\n", result.best_epoch + 1,
                result.history.epochs[static_cast<std::size_t>(result.best_epoch)].valid_auc,
                out_path.c_str());
  } else {
    std::printf("no defined validation AUC; kept final parameters; checkpoint %s\n",
                out_path.c_str());
  }
  return 0;
}

int run_eval(const std::string& data_path, const std::string& ckpt_path,
             const std::string& report_path) {
  const rs::Checkpoint ckpt = rs::load_checkpoint(ckpt_path);
  const rs::Dataset ds = rs::load_dataset(data_path);
  const rs::SplitIndices split = rs::resolve_split(ds, ckpt.valid_fraction, ckpt.train_seed);
  if (split.valid.empty()) throw rs::DataError("eval: empty validation split");
  const auto valid_set = rs::gather(ds, split.valid);

  const rs::EvalReport report =
      rs::evaluate(ckpt.config, ckpt.params, valid_set, ckpt.train_seed, /*config_digest=*/"");
  rs::save_report(report, report_path);
  rs::save_roc_points(report.roc, report_path + ".roc.tsv");
  std::printf("mode %s: AUC %.6f on %lld positive / %lld negative (report %s)\n",
              report.mode.c_str(), report.auc, report.n_pos, report.n_neg, report_path.c_str());
  return 0;
}

int run_compare(const std::string& data_path, const std::string& config_path,
                const std::string& report_dir) {
  const rs::AppConfig cfg = rs::load_config(config_path);
  const rs::Dataset ds = rs::load_dataset(data_path);
  std::filesystem::create_directories(report_dir);

  const auto results = rs::compare_models(ds, cfg.encoder, cfg.train, cfg.digest());
  for (const auto& r : results) {
    const std::string stem = report_dir + "/" + rs::to_string(r.mode);
    rs::save_report(r.report, stem + ".report.json");
    rs::save_roc_points(r.report.roc, stem + ".roc.tsv");
    rs::Checkpoint ckpt;
    ckpt.config = cfg.encoder;
    ckpt.config.mode = r.mode;
    ckpt.params = r.params;
    ckpt.train_seed = cfg.train.seed;
    ckpt.valid_fraction = cfg.train.valid_fraction;
    rs::save_checkpoint(ckpt, stem + ".ckpt");
  }
  const std::string table = rs::comparison_table(results);
  write_text(report_dir + "/summary.txt", table);
  std::fputs(table.c_str(), stdout);
  return 0;
}

int run_gradcheck(const std::string& config_path, double eps, double tol) {
  const rs::AppConfig app = rs::load_config(config_path);
  rs::EncoderConfig cfg = app.encoder;
  const int feature_dim = 6;
  const int n = std::min(4, cfg.max_seq_len);

  // Deterministic random probe sequence with strictly increasing timestamps.
  rs::Rng rng(rs::Rng::mix(app.train.seed, 0x67726164));
  rs::Matrix features(n, feature_dim);
  for (double& v : features.data()) v = rng.normal();
  std::vector<double> timestamps;
  double t = 1000.0;
  for (int i = 0; i < n; ++i) {
    timestamps.push_back(t);
    t += 600.0 + 3000.0 * rng.uniform();
  }

  bool all_ok = true;
  for (rs::PositionMode mode : {rs::PositionMode::kNone, rs::PositionMode::kSinusoidal,
                                rs::PositionMode::kRope, rs::PositionMode::kRedre}) {
    cfg.mode = mode;
    rs::EncoderParams params = rs::EncoderParams::init(cfg, feature_dim, app.train.seed);
    const double pos_weight = 3.0;

    const auto loss_value = [&]() {
      rs::Graph g;
      rs::BoundParams bound = rs::bind_params(g, params);
      const rs::NodeId logit = rs::build_scoring_graph(g, bound, cfg, features, timestamps);
      return g.value(g.weighted_bce(logit, 1, pos_weight))(0, 0);
    };

    rs::Graph g;
    rs::BoundParams bound = rs::bind_params(g, params);
    const rs::NodeId logit = rs::build_scoring_graph(g, bound, cfg, features, timestamps);
    const rs::NodeId loss = g.weighted_bce(logit, 1, pos_weight);
    const auto grads = g.backward(loss);

    std::vector<rs::Matrix> analytic;
    std::vector<rs::NamedParam> named;
    auto entries = params.named();
    for (std::size_t p = 0; p < entries.size(); ++p) {
      analytic.push_back(g.gradient(grads, bound.order[p]));
      named.push_back({entries[p].first, entries[p].second});
    }

    const rs::GradReport report = rs::finite_difference_check(loss_value, analytic, named, eps);
    const bool ok = report.passed(tol);
    all_ok = all_ok && ok;
    if (report.loss_finite) {
      std::printf("mode %-10s max_rel_err %.3e (worst %s, eps %.1e): %s\n", rs::to_string(mode),
                  report.max_rel_error, report.worst_param.c_str(), report.eps,
                  ok ? "OK" : "FAIL");
    } else {
      std::printf("mode %-10s non-finite loss at probe %s: FAIL\n", rs::to_string(mode),
                  report.bad_probe.c_str());
    }
  }
  if (!all_ok) throw rs::InternalCheckError("gradient check failed");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transaction-fraud sequence scorer comparing position encodings"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  std::string synth_out;
  rs::SynthConfig synth_cfg;
  synth->add_option("--out", synth_out, "Output dataset path")->required();
  synth->add_option("--entities", synth_cfg.n_entities, "Number of entities");
  synth->add_option("--fraud-rate", synth_cfg.fraud_rate, "Target positive rate");
  synth->add_option("--burst", synth_cfg.burst_strength, "Timing-signal strength (>= 0)");
  synth->add_option("--seed", synth_cfg.seed, "Generator seed");
  synth->add_option("--mean-len", synth_cfg.mean_len, "Mean transactions per entity");
  synth->add_option("--max-seq-len", synth_cfg.max_seq_len, "Sequence length cap");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Build a dataset from transaction CSVs");
  std::string ing_tx, ing_id, ing_cfg, ing_out;
  ingest->add_option("--transactions", ing_tx, "Transaction CSV")->required();
  ingest->add_option("--identity", ing_id, "Optional identity CSV");
  ingest->add_option("--config", ing_cfg, "Config file")->required();
  ingest->add_option("--out", ing_out, "Output dataset path")->required();

  // train
  auto* train = app.add_subcommand("train", "Train one model");
  std::string tr_data, tr_cfg, tr_mode, tr_out;
  train->add_option("--data", tr_data, "Dataset path")->required();
  train->add_option("--config", tr_cfg, "Config file")->required();
  train->add_option("--mode", tr_mode, "none|sinusoidal|rope|redre (overrides config)");
  train->add_option("--out", tr_out, "Checkpoint output path")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  std::string ev_data, ev_ckpt, ev_report;
  eval->add_option("--data", ev_data, "Dataset path")->required();
  eval->add_option("--checkpoint", ev_ckpt, "Checkpoint path")->required();
  eval->add_option("--report", ev_report, "Report output path")->required();

  // compare
  auto* compare = app.add_subcommand("compare", "Train and evaluate all three encodings");
  std::string cp_data, cp_cfg, cp_dir;
  compare->add_option("--data", cp_data, "Dataset path")->required();
  compare->add_option("--config", cp_cfg, "Config file")->required();
  compare->add_option("--report-dir", cp_dir, "Directory for reports/checkpoints")->required();

  // gradcheck
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient check");
  std::string gc_cfg;
  double gc_eps = 1e-5, gc_tol = 1e-4;
  gradcheck->add_option("--config", gc_cfg, "Config file")->required();
  gradcheck->add_option("--eps", gc_eps, "Central-difference step");
  gradcheck->add_option("--tol", gc_tol, "Max relative error accepted");

  try {
    app.parse(argc, argv);
    if (synth->parsed()) return run_synth(synth_out, synth_cfg);
    if (ingest->parsed()) return run_ingest(ing_tx, ing_id, ing_cfg, ing_out);
    if (train->parsed()) return run_train(tr_data, tr_cfg, tr_mode, tr_out);
    if (eval->parsed()) return run_eval(ev_data, ev_ckpt, ev_report);
    if (compare->parsed()) return run_compare(cp_data, cp_cfg, cp_dir);
    if (gradcheck->parsed()) return run_gradcheck(gc_cfg, gc_eps, gc_tol);
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const rs::UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 1;
  } catch (const rs::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const rs::InternalCheckError& e) {
    std::fprintf(stderr, "internal consistency failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 3;
  }
}
