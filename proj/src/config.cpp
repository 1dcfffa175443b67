#include "sentlab/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "sentlab/errors.hpp"

namespace sentlab::cli {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

uint32_t parse_u32(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    unsigned long x = std::stoul(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return uint32_t(x);
  } catch (const std::exception&) {
    throw UsageError("config: bad value for " + key + ": '" + v + "'");
  }
}

uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return uint64_t(x);
  } catch (const std::exception&) {
    throw UsageError("config: bad value for " + key + ": '" + v + "'");
  }
}

float parse_f32(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    float x = std::stof(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw UsageError("config: bad value for " + key + ": '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw UsageError("config: bad value for " + key + " (expected true|false)");
}

std::vector<std::string> split_commas(const std::string& v) {
  std::vector<std::string> out;
  size_t start = 0;
  while (start <= v.size()) {
    size_t pos = v.find(',', start);
    std::string piece = trim(pos == std::string::npos
                                 ? v.substr(start)
                                 : v.substr(start, pos - start));
    if (!piece.empty()) out.push_back(piece);
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(lineno) +
                       ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "encoder") cfg.model.encoder = model::arch_from_string(value);
    else if (key == "decoder") cfg.model.decoder = model::arch_from_string(value);
    else if (key == "embed_dim") cfg.model.embed_dim = parse_u32(key, value);
    else if (key == "hidden_dim") cfg.model.hidden_dim = parse_u32(key, value);
    else if (key == "vocab_size") cfg.model.vocab_size = parse_u32(key, value);
    else if (key == "max_len") cfg.model.max_len = parse_u32(key, value);
    else if (key == "seed") cfg.model.seed = parse_u64(key, value);
    else if (key == "learning_rate") cfg.model.learning_rate = parse_f32(key, value);
    else if (key == "batch_size") cfg.model.batch_size = parse_u32(key, value);
    else if (key == "epochs") cfg.model.epochs = parse_u32(key, value);
    else if (key == "softmax_bias") cfg.model.softmax_bias = parse_bool(key, value);
    else if (key == "corpus") cfg.corpus_path = value;
    else if (key == "vocab") cfg.vocab_path = value;
    else if (key == "checkpoint") cfg.checkpoint_path = value;
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "sts_files") cfg.sts_files = split_commas(value);
    else if (key == "transfer_file") cfg.transfer_file = value;
    else if (key == "spec") cfg.spec = extract::ReprSpec::parse(value);
    else if (key == "similarity") cfg.similarity = extract::similarity_from_string(value);
    else if (key == "sweep_nmax") cfg.sweep_nmax = parse_u32(key, value);
    else if (key == "folds") cfg.folds = parse_u32(key, value);
    else
      throw UsageError("config line " + std::to_string(lineno) +
                       ": unknown key '" + key + "'");
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

std::string render_run_config(const RunConfig& cfg) {
  std::ostringstream out;
  char lr[32];
  std::snprintf(lr, sizeof lr, "%.9g", double(cfg.model.learning_rate));
  out << "encoder = " << model::arch_name(cfg.model.encoder) << '\n'
      << "decoder = " << model::arch_name(cfg.model.decoder) << '\n'
      << "embed_dim = " << cfg.model.embed_dim << '\n'
      << "hidden_dim = " << cfg.model.hidden_dim << '\n'
      << "vocab_size = " << cfg.model.vocab_size << '\n'
      << "max_len = " << cfg.model.max_len << '\n'
      << "seed = " << cfg.model.seed << '\n'
      << "learning_rate = " << lr << '\n'
      << "batch_size = " << cfg.model.batch_size << '\n'
      << "epochs = " << cfg.model.epochs << '\n'
      << "softmax_bias = " << (cfg.model.softmax_bias ? "true" : "false") << '\n'
      << "corpus = " << cfg.corpus_path << '\n'
      << "vocab = " << cfg.vocab_path << '\n'
      << "checkpoint = " << cfg.checkpoint_path << '\n'
      << "out_dir = " << cfg.out_dir << '\n';
  out << "sts_files = ";
  for (size_t i = 0; i < cfg.sts_files.size(); ++i) {
    if (i) out << ',';
    out << cfg.sts_files[i];
  }
  out << '\n'
      << "transfer_file = " << cfg.transfer_file << '\n'
      << "spec = " << cfg.spec.to_string() << '\n'
      << "similarity = " << extract::similarity_name(cfg.similarity) << '\n'
      << "sweep_nmax = " << cfg.sweep_nmax << '\n'
      << "folds = " << cfg.folds << '\n';
  return out.str();
}

}  // namespace sentlab::cli
