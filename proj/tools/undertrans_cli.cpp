// undertrans: generate synthetic corpora, decode them with the exact channel
// scorer, and analyze under-translation.

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "undertrans/automaton.hpp"
#include "undertrans/diagnostics.hpp"
#include "undertrans/errors.hpp"
#include "undertrans/io.hpp"
#include "undertrans/pipeline.hpp"
#include "undertrans/verify.hpp"

namespace fs = std::filesystem;
using namespace undertrans;

namespace {

struct RunConfig {
  std::uint64_t seed = 1;
  std::string level = "sentence";
  std::size_t pairs = 1000;
  std::string mode = "test";
  std::string corpus, results, out, spec_path, dump_automaton;
  int beam = 5;
  double alpha = 1.0;
  std::string penalty = "none";
  double tau = 1.0, beta = 0.4, beta_cov = 0.1, temperature = 1.0;
  int cap = 20;
  std::optional<int> max_len;
  unsigned workers = 0;
  double bin_width = 0.5;
  std::vector<double> tau_grid, beta_grid, alpha_grid, beta_cov_grid;
};

double parse_number(const std::string& s) {
  if (s == "-inf") return -INFINITY;
  if (s == "inf") return INFINITY;
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw ConfigError("not a number: '" + s + "'");
  return v;
}

double json_number(const Json& j) {
  return j.is_string() ? parse_number(j.get<std::string>()) : j.get<double>();
}

std::vector<double> json_numbers(const Json& j) {
  std::vector<double> out;
  for (const auto& v : j) out.push_back(json_number(v));
  return out;
}

Json number_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

Json numbers_json(const std::vector<double>& v) {
  Json out = Json::array();
  for (double x : v) out.push_back(number_json(x));
  return out;
}

Json to_json(const RunConfig& c) {
  Json j{{"seed", c.seed},       {"level", c.level},     {"pairs", c.pairs},
         {"mode", c.mode},       {"beam", c.beam},       {"alpha", c.alpha},
         {"penalty", c.penalty}, {"tau", number_json(c.tau)}, {"beta", c.beta},
         {"cap", c.cap},         {"beta_cov", c.beta_cov}, {"temperature", c.temperature}};
  j["max_len"] = c.max_len ? Json(*c.max_len) : Json(nullptr);
  j["corpus"] = c.corpus;
  j["results"] = c.results;
  j["out"] = c.out;
  j["spec"] = c.spec_path;
  j["bin_width"] = c.bin_width;
  j["tau_grid"] = numbers_json(c.tau_grid);
  j["beta_grid"] = numbers_json(c.beta_grid);
  j["alpha_grid"] = numbers_json(c.alpha_grid);
  j["beta_cov_grid"] = numbers_json(c.beta_cov_grid);
  return j;
}

// Registers the options shared by every subcommand. Numeric options are read
// as strings so that "-inf" is accepted for tau.
struct Options {
  RunConfig cfg;
  std::string config_path;
  std::string tau = "1", max_len;
  std::vector<std::string> tau_grid;
  std::map<std::string, CLI::Option*> by_key;

  void add(CLI::App& app) {
    auto reg = [&](const std::string& key, CLI::Option* o) { by_key[key] = o; };
    reg("seed", app.add_option("--seed", cfg.seed, "random seed"));
    reg("level", app.add_option("--level", cfg.level, "sentence or document")
                     ->check(CLI::IsMember({"sentence", "document"})));
    reg("pairs", app.add_option("--pairs", cfg.pairs, "number of pairs to generate"));
    reg("mode", app.add_option("--mode", cfg.mode, "train or test")
                    ->check(CLI::IsMember({"train", "test"})));
    reg("corpus", app.add_option("--corpus", cfg.corpus, "corpus JSONL"));
    reg("results", app.add_option("--results", cfg.results, "decode results JSONL"));
    reg("out", app.add_option("--out", cfg.out, "output file or directory"));
    reg("spec", app.add_option("--spec", cfg.spec_path, "channel spec JSON"));
    reg("beam", app.add_option("--beam", cfg.beam, "beam size"));
    reg("alpha", app.add_option("--alpha", cfg.alpha, "length normalization exponent"));
    reg("penalty", app.add_option("--penalty", cfg.penalty, "none, eos or coverage")
                       ->check(CLI::IsMember({"none", "eos", "coverage"})));
    reg("tau", app.add_option("--tau", tau, "EOS margin threshold (-inf disables)"));
    reg("beta", app.add_option("--beta", cfg.beta, "EOS penalty scale"));
    reg("cap", app.add_option("--cap", cfg.cap, "EOS penalty length cap"));
    reg("beta_cov", app.add_option("--beta-cov", cfg.beta_cov, "coverage penalty scale"));
    reg("temperature", app.add_option("--temperature", cfg.temperature, "softmax temperature"));
    reg("max_len", app.add_option("--max-len", max_len, "maximum output length"));
    reg("workers", app.add_option("--workers", cfg.workers, "decode threads (0 = all cores)"));
    reg("bin_width", app.add_option("--bin-width", cfg.bin_width, "EOS histogram bin width"));
    reg("tau_grid", app.add_option("--tau-grid", tau_grid, "tau values to sweep")->delimiter(','));
    reg("beta_grid",
        app.add_option("--beta-grid", cfg.beta_grid, "beta values to sweep")->delimiter(','));
    reg("alpha_grid",
        app.add_option("--alpha-grid", cfg.alpha_grid, "alpha values to sweep")->delimiter(','));
    reg("beta_cov_grid", app.add_option("--beta-cov-grid", cfg.beta_cov_grid,
                                        "coverage beta values to sweep")
                             ->delimiter(','));
    reg("dump_automaton", app.add_option("--dump-automaton", cfg.dump_automaton,
                                         "write each source's automaton to this JSONL"));
    app.add_option("--config", config_path, "JSON config; explicit flags take precedence");
  }

  bool given(const std::string& key) const {
    const auto it = by_key.find(key);
    return it != by_key.end() && it->second->count() > 0;
  }

  RunConfig resolve() {
    if (given("tau")) cfg.tau = parse_number(tau);
    if (given("max_len")) cfg.max_len = static_cast<int>(parse_number(max_len));
    if (given("tau_grid")) {
      cfg.tau_grid.clear();
      for (const auto& t : tau_grid) cfg.tau_grid.push_back(parse_number(t));
    }
    if (config_path.empty()) return cfg;
    Json j;
    try {
      j = Json::parse(read_text(config_path));
    } catch (const Json::exception& e) {
      throw ConfigError(config_path + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError(config_path + ": config must be a JSON object");
    const std::map<std::string, std::function<void(const Json&)>> setters{
        {"seed", [&](const Json& v) { cfg.seed = v.get<std::uint64_t>(); }},
        {"level", [&](const Json& v) { cfg.level = v.get<std::string>(); }},
        {"pairs", [&](const Json& v) { cfg.pairs = v.get<std::size_t>(); }},
        {"mode", [&](const Json& v) { cfg.mode = v.get<std::string>(); }},
        {"corpus", [&](const Json& v) { cfg.corpus = v.get<std::string>(); }},
        {"results", [&](const Json& v) { cfg.results = v.get<std::string>(); }},
        {"out", [&](const Json& v) { cfg.out = v.get<std::string>(); }},
        {"spec", [&](const Json& v) { cfg.spec_path = v.get<std::string>(); }},
        {"beam", [&](const Json& v) { cfg.beam = v.get<int>(); }},
        {"alpha", [&](const Json& v) { cfg.alpha = json_number(v); }},
        {"penalty", [&](const Json& v) { cfg.penalty = v.get<std::string>(); }},
        {"tau", [&](const Json& v) { cfg.tau = json_number(v); }},
        {"beta", [&](const Json& v) { cfg.beta = json_number(v); }},
        {"cap", [&](const Json& v) { cfg.cap = v.get<int>(); }},
        {"beta_cov", [&](const Json& v) { cfg.beta_cov = json_number(v); }},
        {"temperature", [&](const Json& v) { cfg.temperature = json_number(v); }},
        {"max_len",
         [&](const Json& v) {
           if (v.is_null()) cfg.max_len.reset();
           else cfg.max_len = v.get<int>();
         }},
        {"workers", [&](const Json& v) { cfg.workers = v.get<unsigned>(); }},
        {"bin_width", [&](const Json& v) { cfg.bin_width = json_number(v); }},
        {"tau_grid", [&](const Json& v) { cfg.tau_grid = json_numbers(v); }},
        {"beta_grid", [&](const Json& v) { cfg.beta_grid = json_numbers(v); }},
        {"alpha_grid", [&](const Json& v) { cfg.alpha_grid = json_numbers(v); }},
        {"beta_cov_grid", [&](const Json& v) { cfg.beta_cov_grid = json_numbers(v); }},
        {"dump_automaton", [&](const Json& v) { cfg.dump_automaton = v.get<std::string>(); }},
    };
    for (const auto& [key, value] : j.items()) {
      const auto it = setters.find(key);
      if (it == setters.end()) throw ConfigError(config_path + ": unknown key '" + key + "'");
      if (given(key)) continue;
      try {
        it->second(value);
      } catch (const Json::exception& e) {
        throw ConfigError(config_path + ": bad value for '" + key + "': " + e.what());
      }
    }
    return cfg;
  }
};

ChannelSpec load_spec(const RunConfig& c) {
  ChannelSpec spec = c.spec_path.empty() ? ChannelSpec{}
                                         : channel_spec_from_json(Json::parse(read_text(c.spec_path)));
  spec.level = parse_level(c.level);
  spec.validate();
  return spec;
}

BeamConfig beam_config(const RunConfig& c) {
  BeamConfig b;
  b.beam_size = c.beam;
  b.alpha = c.alpha;
  b.max_len = c.max_len;
  b.temperature = c.temperature;
  b.validate();
  return b;
}

PenaltyConfig penalty_config(const RunConfig& c) {
  PenaltyConfig p;
  p.mode = parse_penalty_mode(c.penalty);
  p.tau = c.tau;
  p.beta = c.beta;
  p.cap = c.cap;
  p.beta_cov = c.beta_cov;
  p.validate();
  return p;
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw ConfigError(std::string("missing required ") + flag);
}

Json provenance(const std::string& command, const RunConfig& c) {
  return Json{{"schema", kSchemaVersion}, {"command", command}, {"config", to_json(c)}};
}

// JSONL files carry one record per line, so their provenance goes to a sidecar.
void write_sidecar(const fs::path& path, const Json& header) {
  write_text(path.string() + ".meta.json", header.dump(2) + "\n");
}

std::string csv_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_header(const Json& header) { return "# config: " + header.dump() + "\n"; }

int cmd_gen(const RunConfig& c) {
  require(c.out, "--out");
  const ChannelSpec spec = load_spec(c);
  if (c.mode != "test" && c.mode != "train") throw ConfigError("mode must be train or test");
  const CorpusMode mode = c.mode == "test" ? CorpusMode::Test : CorpusMode::Train;
  const auto corpus = generate_corpus(spec, c.pairs, mode, c.seed);
  write_corpus(c.out, corpus);
  Json header = provenance("gen", c);
  header["channel"] = undertrans::to_json(spec);
  write_sidecar(c.out, header);
  std::cout << corpus.size() << " pairs written to " << c.out << "\n";
  return 0;
}

int cmd_decode(const RunConfig& c) {
  require(c.corpus, "--corpus");
  require(c.out, "--out");
  const ChannelSpec spec = load_spec(c);
  const BeamConfig beam = beam_config(c);
  const PenaltyConfig penalty = penalty_config(c);
  const auto corpus = read_corpus(c.corpus);
  const auto records = decode_corpus(corpus, spec, beam, penalty, c.workers);
  write_records(c.out, records);
  Json header = provenance("decode", c);
  header["channel"] = undertrans::to_json(spec);
  header["beam_config"] = undertrans::to_json(beam);
  header["penalty_config"] = undertrans::to_json(penalty);
  write_sidecar(c.out, header);
  if (!c.dump_automaton.empty()) {
    std::vector<Json> dumps;
    for (const Pair& p : corpus) {
      ChannelSpec s = spec;
      s.level = p.level;
      Json d = undertrans::to_json(compile(s, p.source));
      d["id"] = p.id;
      dumps.push_back(std::move(d));
    }
    write_jsonl(c.dump_automaton, dumps);
  }
  std::size_t applied = 0;
  for (const auto& r : records) applied += r.penalty_applied;
  std::cout << records.size() << " records written to " << c.out << " (penalty applied to "
            << applied << ")\n";
  return 0;
}

int cmd_analyze(const RunConfig& c) {
  require(c.corpus, "--corpus");
  require(c.results, "--results");
  require(c.out, "--out");
  const auto corpus = read_corpus(c.corpus);
  const auto records = read_records(c.results);
  if (records.size() != corpus.size()) {
    throw IoError(c.results + ": " + std::to_string(records.size()) + " records for " +
                  std::to_string(corpus.size()) + " corpus pairs");
  }
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (records[i].id != corpus[i].id) {
      throw IoError(c.results + ":" + std::to_string(i + 1) + ": id " +
                    std::to_string(records[i].id) + " does not match corpus id " +
                    std::to_string(corpus[i].id));
    }
  }
  const Json header = provenance("analyze", c);
  fs::create_directories(c.out);
  const fs::path dir(c.out);

  std::vector<ErrorLabel> labels;
  std::vector<double> eos;
  std::map<Level, std::vector<ErrorLabel>> by_level;
  std::vector<Sequence> all_src, all_out, under_src, under_out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& out = records[i].best.tokens;
    ErrorLabel l = label_output(corpus[i].level, corpus[i].source, out);
    labels.push_back(l);
    by_level[corpus[i].level].push_back(l);
    eos.push_back(records[i].best.eos_logprob);
    all_src.push_back(corpus[i].source);
    all_out.push_back(out);
    if (l.kind == ErrorKind::Under) {
      under_src.push_back(corpus[i].source);
      under_out.push_back(out);
    }
  }

  Json summary = header;
  Json levels = Json::object();
  for (const auto& [level, ls] : by_level) {
    levels[std::string(undertrans::to_string(level))] = undertrans::to_json(summarize(ls));
  }
  summary["levels"] = levels;
  summary["overall"] = undertrans::to_json(summarize(labels));
  const EosHistogram hist = eos_histogram(eos, labels, c.bin_width);
  const auto curve = eos_by_missing(eos, labels);
  std::vector<double> xs, ys;
  for (const auto& [missing, g] : curve) {
    xs.push_back(missing);
    ys.push_back(g.mean_eos_logprob);
  }
  const auto rho = spearman(xs, ys);
  summary["eos"] = Json{{"mean_all", hist.mean_all},
                        {"mean_under", hist.mean_under ? Json(*hist.mean_under) : Json(nullptr)},
                        {"n_all", hist.n_all},
                        {"n_under", hist.n_under},
                        {"spearman_missing_vs_eos", rho ? Json(*rho) : Json(nullptr)}};
  write_text(dir / "summary.json", summary.dump(2) + "\n");

  Json words = header;
  words["all"] = undertrans::to_json(word_distribution(all_src, all_out));
  words["under"] = under_src.empty() ? Json(nullptr)
                                     : undertrans::to_json(word_distribution(under_src, under_out));
  write_text(dir / "word_distribution.json", words.dump(2) + "\n");

  Json types = header;
  types["doc_types"] = undertrans::to_json(summarize(labels))["doc_types"];
  write_text(dir / "doc_types.json", types.dump(2) + "\n");

  std::string csv = csv_header(header) + "bin_lo,bin_hi,count_all,count_under\n";
  for (const auto& b : hist.bins) {
    csv += csv_number(b.lo) + "," + csv_number(b.hi) + "," + std::to_string(b.count_all) + "," +
           std::to_string(b.count_under) + "\n";
  }
  write_text(dir / "eos_histogram.csv", csv);

  csv = csv_header(header) + "missing,count,mean_eos_logprob\n";
  for (const auto& [missing, g] : curve) {
    csv += std::to_string(missing) + "," + std::to_string(g.count) + "," +
           csv_number(g.mean_eos_logprob) + "\n";
  }
  write_text(dir / "eos_by_missing.csv", csv);

  const ErrorSummary s = summarize(labels);
  std::cout << s.total << " records: Under " << s.under_pct() << "%, Over " << s.over_pct()
            << "%; reports in " << c.out << "\n";
  return 0;
}

std::string fmt_name(const char* prefix, double v) {
  std::ostringstream os;
  os << prefix << v;
  return os.str();
}

int cmd_compare(const RunConfig& c) {
  require(c.corpus, "--corpus");
  require(c.out, "--out");
  const ChannelSpec spec = load_spec(c);
  const auto corpus = read_corpus(c.corpus);
  const PenaltyMode mode = parse_penalty_mode(c.penalty);
  const std::vector<double> alphas = c.alpha_grid.empty() ? std::vector{c.alpha} : c.alpha_grid;
  const std::vector<double> taus = c.tau_grid.empty() ? std::vector{c.tau} : c.tau_grid;
  const std::vector<double> betas = c.beta_grid.empty() ? std::vector{c.beta} : c.beta_grid;
  const std::vector<double> covs =
      c.beta_cov_grid.empty() ? std::vector{c.beta_cov} : c.beta_cov_grid;

  RunConfig base_cfg = c;
  base_cfg.penalty = "none";
  std::vector<NamedConfig> configs{{"baseline", beam_config(base_cfg), penalty_config(base_cfg)}};
  struct Cell {
    double alpha, tau, beta;
    std::size_t row;
  };
  std::vector<Cell> cells;
  for (double alpha : alphas) {
    RunConfig rc = c;
    rc.alpha = alpha;
    const std::string a = alphas.size() > 1 ? fmt_name(" alpha=", alpha) : "";
    if (mode == PenaltyMode::Eos) {
      for (double tau : taus) {
        for (double beta : betas) {
          rc.tau = tau;
          rc.beta = beta;
          cells.push_back({alpha, tau, beta, configs.size()});
          configs.push_back({fmt_name("eos tau=", tau) + fmt_name(" beta=", beta) + a,
                             beam_config(rc), penalty_config(rc)});
        }
      }
    } else if (mode == PenaltyMode::Coverage) {
      for (double bc : covs) {
        rc.beta_cov = bc;
        configs.push_back({fmt_name("coverage beta_cov=", bc) + a, beam_config(rc), penalty_config(rc)});
      }
    } else if (alphas.size() > 1) {
      configs.push_back({"none" + a, beam_config(rc), penalty_config(rc)});
    }
  }
  const ComparisonReport report = compare_penalties(corpus, spec, configs, c.workers);

  fs::create_directories(c.out);
  const fs::path dir(c.out);
  Json header = provenance("compare", c);
  header["seed"] = c.seed;
  header["grid"] = Json{{"mode", c.penalty},
                        {"alpha", numbers_json(alphas)},
                        {"tau", numbers_json(taus)},
                        {"beta", numbers_json(betas)},
                        {"beta_cov", numbers_json(covs)}};
  Json table = header;
  const Json body = undertrans::to_json(report);
  for (const auto& [k, v] : body.items()) table[k] = v;
  write_text(dir / "comparison.json", table.dump(2) + "\n");

  if (!cells.empty()) {
    std::string csv = csv_header(header) + "alpha,tau";
    for (double beta : betas) csv += ",beta=" + csv_number(beta);
    csv += "\n";
    for (double alpha : alphas) {
      for (double tau : taus) {
        csv += csv_number(alpha) + "," + csv_number(tau);
        for (double beta : betas) {
          const auto it = std::find_if(cells.begin(), cells.end(), [&](const Cell& x) {
            return x.alpha == alpha && x.tau == tau && x.beta == beta;
          });
          csv += "," + std::to_string(report.rows[it->row].resolved_under);
        }
        csv += "\n";
      }
    }
    write_text(dir / "sweep_delta_under.csv", csv);
  }

  for (const auto& r : report.rows) {
    std::cout << r.name << ": Under " << r.errors.under << ", Over " << r.errors.over
              << ", dUnder " << r.resolved_under << ", dAll " << r.changed << ", dTokens "
              << r.token_delta << ", BLEU " << r.bleu << "\n";
  }
  return 0;
}

int cmd_verify(const RunConfig& c) {
  VerifyOptions opts;
  opts.seed = c.seed;
  const auto results = verify_all(opts);
  bool ok = true;
  Json report = provenance("verify", c);
  Json suites = Json::array();
  for (const auto& r : results) {
    ok = ok && r.passed;
    std::cout << (r.passed ? "pass " : "FAIL ") << r.name << ": " << r.detail << "\n";
    suites.push_back(
        Json{{"name", r.name}, {"passed", r.passed}, {"checks", r.checks}, {"detail", r.detail}});
  }
  report["suites"] = suites;
  if (!c.out.empty()) write_text(c.out, report.dump(2) + "\n");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Under-translation experiments on a synthetic noisy channel"};
  app.require_subcommand(1);
  struct Sub {
    const char* name;
    const char* help;
    int (*run)(const RunConfig&);
  };
  const std::vector<Sub> subs{{"gen", "generate a corpus", cmd_gen},
                              {"decode", "beam-decode a corpus", cmd_decode},
                              {"analyze", "error rates and EOS diagnostics", cmd_analyze},
                              {"compare", "compare penalty configurations", cmd_compare},
                              {"verify", "run the oracle suites", cmd_verify}};
  std::vector<Options> options(subs.size());
  std::vector<CLI::App*> apps;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    CLI::App* sub = app.add_subcommand(subs[i].name, subs[i].help);
    options[i].add(*sub);
    apps.push_back(sub);
  }
  CLI11_PARSE(app, argc, argv);
  try {
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (apps[i]->parsed()) return subs[i].run(options[i].resolve());
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
