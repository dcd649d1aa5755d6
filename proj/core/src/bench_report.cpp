#include "aadmm/bench.hpp"
#include "aadmm/trace_io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace aadmm::bench {

namespace fs = std::filesystem;

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string slug(const std::string& s) {
  std::string out;
  for (char c : s) {
    const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-';
    if (keep) {
      out += c;
    } else if (out.empty() || out.back() != '_') {
      out += '_';
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

std::ofstream open_for_write(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string trace_name(const RunRecord& r, std::optional<std::size_t> value_index) {
  std::ostringstream os;
  if (value_index) os << 'v' << *value_index << '_';
  os << 'p' << r.summary.policy_index << '_' << slug(r.summary.policy) << "_seed"
     << r.summary.seed << ".csv";
  return os.str();
}

ReportFiles emit(const std::vector<RunRecord>& runs, const nlohmann::json& echo,
                 const std::vector<std::optional<std::size_t>>& value_index, const fs::path& dir,
                 bool include_timing) {
  std::error_code ec;
  fs::create_directories(dir / "traces", ec);
  if (ec) throw std::runtime_error("cannot create " + (dir / "traces").string() + ": " + ec.message());

  ReportFiles files;
  files.summary_csv = dir / "summary.csv";
  files.summary_text = dir / "summary.txt";
  files.manifest_json = dir / "manifest.json";

  {
    auto out = open_for_write(files.summary_csv);
    write_summary_csv(out, runs, include_timing);
    finish(out, files.summary_csv);
  }
  {
    auto out = open_for_write(files.summary_text);
    write_summary_text(out, runs);
    finish(out, files.summary_text);
  }
  {
    auto out = open_for_write(files.manifest_json);
    out << echo.dump(2) << '\n';
    finish(out, files.manifest_json);
  }
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const fs::path p = dir / "traces" / trace_name(runs[i], value_index[i]);
    auto out = open_for_write(p);
    write_trace_csv(out, runs[i].trace, include_timing);
    finish(out, p);
    files.traces.push_back(p);
  }
  return files;
}

nlohmann::json hashed_echo(const char* key, const nlohmann::json& body) {
  const std::string canonical = body.dump();
  return {{key, body}, {"content_hash", git_blob_hash(canonical)}};
}

}  // namespace

const std::vector<std::string>& summary_columns() {
  static const std::vector<std::string> cols = {
      "problem",  "policy",    "seed",   "sweep_value",        "iterations",
      "iterations_label",      "converged", "status", "final_rel_residual",
      "objective", "wall_time_s"};
  return cols;
}

void write_summary_csv(std::ostream& os, const std::vector<RunRecord>& runs,
                       bool include_timing) {
  const auto& cols = summary_columns();
  const std::size_t ncols = include_timing ? cols.size() : cols.size() - 1;
  for (std::size_t i = 0; i < ncols; ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const RunRecord& r : runs) {
    const RunSummary& s = r.summary;
    os << csv_field(s.problem) << ',' << csv_field(s.policy) << ',' << s.seed << ','
       << (s.sweep_value ? format_real(*s.sweep_value) : "") << ',' << s.iterations << ','
       << s.iterations_label() << ',' << (s.converged ? "true" : "false") << ','
       << to_string(s.status) << ',' << format_real(s.final_rel_residual) << ','
       << format_real(s.objective);
    if (include_timing) os << ',' << format_real(s.wall_time_s);
    os << '\n';
  }
}

void write_summary_text(std::ostream& os, const std::vector<RunRecord>& runs) {
  std::vector<std::vector<std::string>> table;
  table.push_back({"problem", "policy", "seed", "value", "iterations", "time (s)", "rel_residual"});
  char buf[64];
  for (const RunRecord& r : runs) {
    const RunSummary& s = r.summary;
    std::vector<std::string> row = {s.problem, s.policy, std::to_string(s.seed)};
    if (s.sweep_value) {
      std::snprintf(buf, sizeof buf, "%.4g", *s.sweep_value);
      row.emplace_back(buf);
    } else {
      row.emplace_back("-");
    }
    row.push_back(s.iterations_label());
    std::snprintf(buf, sizeof buf, "%.3f", s.wall_time_s);
    row.emplace_back(buf);
    std::snprintf(buf, sizeof buf, "%.3e", s.final_rel_residual);
    row.emplace_back(buf);
    if (s.status == RunStatus::kError) row.back() += "  error: " + s.message;
    table.push_back(std::move(row));
  }
  std::vector<std::size_t> width(table.front().size(), 0);
  for (const auto& row : table) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  for (const auto& row : table) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      // Text columns left-aligned, numbers right-aligned.
      const bool left = c < 2;
      const std::string pad(width[c] - row[c].size(), ' ');
      line += c ? "  " : "";
      line += left ? row[c] + pad : pad + row[c];
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    os << line << '\n';
  }
}

std::string git_blob_hash(const std::string& content) {
  const std::string header = "blob " + std::to_string(content.size()) + std::string(1, '\0');
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw std::runtime_error("git_blob_hash: out of memory");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, digest, &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw std::runtime_error("git_blob_hash: digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

ReportFiles emit_report(const MatrixResult& result, const fs::path& dir, bool include_timing) {
  return emit(result.runs, hashed_echo("manifest", to_json(result.manifest)),
              std::vector<std::optional<std::size_t>>(result.runs.size()), dir, include_timing);
}

ReportFiles emit_report(const SweepResult& result, const fs::path& dir, bool include_timing) {
  std::vector<std::optional<std::size_t>> index(result.runs.size());
  const std::size_t per_value =
      result.sweep.base.policies.size() * result.sweep.base.seeds.size();
  for (std::size_t i = 0; i < index.size(); ++i) index[i] = i / std::max<std::size_t>(1, per_value);
  return emit(result.runs, hashed_echo("sweep", to_json(result.sweep)), index, dir,
              include_timing);
}

}  // namespace aadmm::bench
