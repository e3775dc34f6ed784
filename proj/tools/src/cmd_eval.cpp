#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "con360/io.hpp"
#include "con360/metrics.hpp"
#include "context.hpp"

namespace con360::cli {
namespace {

struct SklOptions {
  std::string gen;
  std::string tgt;
  double eps = metrics::kDefaultEps;
  std::string model;
  std::string out;
};

struct FrechetOptions {
  std::string a;
  std::string b;
  std::string kind = "frechet";
  std::string estimator = "unbiased";
  std::string model;
  std::string out;
};

struct ReportOptions {
  std::vector<std::string> inputs;
  std::string out;
  std::string markdown;
};

TensorF as_sequence(TensorF t) {
  if (t.rank() == 2) return TensorF({1, t.dim(0), t.dim(1)}, std::move(t.storage()));
  return t;
}

void write_report(const json& report, const std::string& out_arg, const std::string& command,
                  Sidecar& sidecar, const RunContext& ctx) {
  const fs::path out = ctx.output(out_arg);
  io::write_text_atomic(out, report.dump(2) + "\n");
  sidecar.add_output(out);
  sidecar.write(sidecar_path_for_file(out));
  if (ctx.out) *ctx.out << command << ": " << report.at("metric").get<std::string>() << " = "
                        << std::setprecision(10) << report.at("value").get<double>() << '\n';
  ctx.report(out);
}

void run_skl(const SklOptions& o, const RunContext& ctx) {
  const fs::path gen = ctx.input(o.gen);
  const fs::path tgt = ctx.input(o.tgt);
  const auto terms = metrics::s_kl_terms(as_sequence(io::read_npy_float(gen)),
                                         as_sequence(io::read_npy_float(tgt)), o.eps);
  const double value = metrics::pairwise_sum(terms) / static_cast<double>(terms.size());
  const json report = {{"metric", "s_kl"},
                       {"value", value},
                       {"n_frames", terms.size()},
                       {"per_frame", terms},
                       {"params", {{"eps", o.eps}, {"model", o.model}}}};
  Sidecar sidecar("eval skl");
  sidecar.params = report.at("params");
  sidecar.add_input("generated", o.gen, gen);
  sidecar.add_input("target", o.tgt, tgt);
  write_report(report, o.out, "eval skl", sidecar, ctx);
}

void run_frechet(const FrechetOptions& o, const RunContext& ctx) {
  if (o.kind != "frechet" && o.kind != "fad" && o.kind != "fvd") {
    throw UsageError("--kind must be frechet, fad or fvd");
  }
  metrics::CovarianceEstimator est;
  if (o.estimator == "unbiased") {
    est = metrics::CovarianceEstimator::kUnbiased;
  } else if (o.estimator == "ml") {
    est = metrics::CovarianceEstimator::kMaximumLikelihood;
  } else {
    throw UsageError("--estimator must be 'unbiased' or 'ml'");
  }
  const fs::path a = ctx.input(o.a);
  const fs::path b = ctx.input(o.b);
  const auto ea = metrics::embeddings_from_tensor(io::as_double_tensor(io::read_npy(a)), o.a);
  const auto eb = metrics::embeddings_from_tensor(io::as_double_tensor(io::read_npy(b)), o.b);
  const double value =
      metrics::frechet_distance(metrics::gaussian_fit(ea, est), metrics::gaussian_fit(eb, est));
  const json report = {
      {"metric", o.kind},
      {"value", value},
      {"n_samples", {{"a", ea.vectors.rows()}, {"b", eb.vectors.rows()}}},
      {"dim", ea.vectors.cols()},
      {"params", {{"estimator", o.estimator}, {"model", o.model}}}};
  Sidecar sidecar("eval frechet");
  sidecar.params = report.at("params");
  sidecar.params["kind"] = o.kind;
  sidecar.add_input("a", o.a, a);
  sidecar.add_input("b", o.b, b);
  write_report(report, o.out, "eval frechet", sidecar, ctx);
}

std::string format_cell(const std::optional<double>& v) {
  if (!v) return "-";
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << *v;
  return s.str();
}

void run_report(const ReportOptions& o, const RunContext& ctx) {
  static const std::vector<std::pair<std::string, std::string>> kColumns = {
      {"s_kl", "S_KL"}, {"fad", "FAD"}, {"fvd", "FVD"}};
  Sidecar sidecar("eval report");
  // model -> metric -> values, in input order.
  std::map<std::string, std::map<std::string, std::vector<double>>> table;
  for (const auto& arg : o.inputs) {
    const fs::path p = ctx.input(arg);
    const auto bytes = io::read_file(p);
    const json r = json::parse(bytes.begin(), bytes.end());
    const std::string model = r.at("params").value("model", std::string());
    table[model][r.at("metric").get<std::string>()].push_back(r.at("value").get<double>());
    sidecar.add_input("report", arg, p);
  }

  json rows = json::array();
  std::ostringstream md;
  md << "| Model |";
  for (const auto& [_, title] : kColumns) md << ' ' << title << " |";
  md << "\n|---|";
  for (std::size_t i = 0; i < kColumns.size(); ++i) md << "---|";
  md << '\n';
  for (const auto& [model, metrics_by_name] : table) {
    json row = {{"model", model}};
    md << "| " << (model.empty() ? "(unnamed)" : model) << " |";
    for (const auto& [key, title] : kColumns) {
      std::optional<double> mean;
      if (auto it = metrics_by_name.find(key); it != metrics_by_name.end()) {
        mean = metrics::pairwise_sum(it->second) / static_cast<double>(it->second.size());
        row[title] = *mean;
        row["n_" + key] = it->second.size();
      } else {
        row[title] = nullptr;
      }
      md << ' ' << format_cell(mean) << " |";
    }
    rows.push_back(std::move(row));
  }
  const json summary = {{"columns", {"S_KL", "FAD", "FVD"}}, {"rows", rows}};
  const fs::path out = ctx.output(o.out);
  io::write_text_atomic(out, summary.dump(2) + "\n");
  sidecar.add_output(out);
  if (!o.markdown.empty()) {
    const fs::path md_path = ctx.output(o.markdown);
    io::write_text_atomic(md_path, md.str());
    sidecar.add_output(md_path);
  }
  sidecar.write(sidecar_path_for_file(out));
  if (ctx.out) *ctx.out << md.str();
  ctx.report(out);
}

}  // namespace

void add_eval_commands(CLI::App& app, Registry& reg, RunContext& ctx) {
  auto* eval = app.add_subcommand("eval", "Objective metrics and summaries");
  eval->require_subcommand(1);

  auto so = reg.make<SklOptions>();
  auto* skl = eval->add_subcommand("skl", "Mean per-frame KL divergence between saliency maps");
  skl->add_option("--gen", so->gen, "Generated saliency NPY (T,H,W)")->required();
  skl->add_option("--tgt", so->tgt, "Target saliency NPY (T,H,W)")->required();
  skl->add_option("--eps", so->eps, "Additive smoothing before normalization")
      ->capture_default_str();
  skl->add_option("--model", so->model, "Model label for reports");
  skl->add_option("--out", so->out, "Report JSON")->required();
  reg.on(skl, [so, &ctx] { run_skl(*so, ctx); });

  auto fo = reg.make<FrechetOptions>();
  auto* fr = eval->add_subcommand("frechet", "Frechet distance between embedding Gaussians");
  fr->add_option("--a", fo->a, "Embeddings NPY (N,D)")->required();
  fr->add_option("--b", fo->b, "Embeddings NPY (N,D)")->required();
  fr->add_option("--kind", fo->kind, "Report label: frechet, fad or fvd")->capture_default_str();
  fr->add_option("--estimator", fo->estimator, "unbiased or ml")->capture_default_str();
  fr->add_option("--model", fo->model, "Model label for reports");
  fr->add_option("--out", fo->out, "Report JSON")->required();
  reg.on(fr, [fo, &ctx] { run_frechet(*fo, ctx); });

  auto ro = reg.make<ReportOptions>();
  auto* report = eval->add_subcommand("report", "Aggregate metric reports per model");
  report->add_option("--in", ro->inputs, "Report JSON files")->required()->expected(1, -1);
  report->add_option("--out", ro->out, "Summary JSON")->required();
  report->add_option("--markdown", ro->markdown, "Optional Markdown table");
  reg.on(report, [ro, &ctx] { run_report(*ro, ctx); });
}

}  // namespace con360::cli
