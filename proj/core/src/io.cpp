#include "epidiff/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace epidiff {

std::uint64_t fnv1a_hash(const std::string& payload) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : payload) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("atomic_write: cannot open " + tmp);
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("atomic_write: write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_density_csv(const std::string& path, const Trajectory& traj) {
  std::ostringstream out;
  out << "t,x,value\n";
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    for (int i = 0; i < traj.grid->n_cells; ++i) {
      out << format_double(traj.times[k]) << ',' << format_double(traj.grid->centers[i])
          << ',' << format_double(traj.snapshots[k][i]) << '\n';
    }
  }
  atomic_write(path, out.str());
}

Trajectory read_density_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_density_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,x,value", 0) != 0)
    throw std::runtime_error("read_density_csv: bad header in " + path);

  std::vector<double> times;
  std::vector<double> xs;
  std::vector<std::vector<double>> rows;
  double current_t = 0.0;
  bool have_t = false;
  bool first_block = true;
  std::vector<double> block;
  std::vector<double> first_xs;

  auto flush_block = [&]() {
    if (!have_t) return;
    rows.push_back(block);
    times.push_back(current_t);
    block.clear();
  };

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string a, b, c;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') || !std::getline(ls, c))
      throw std::runtime_error("read_density_csv: malformed row: " + line);
    const double t = std::stod(a), x = std::stod(b), v = std::stod(c);
    if (!have_t || t != current_t) {
      flush_block();
      current_t = t;
      have_t = true;
      first_block = times.empty();
    }
    if (first_block) first_xs.push_back(x);
    block.push_back(v);
  }
  flush_block();
  if (times.empty()) throw std::runtime_error("read_density_csv: no data in " + path);
  for (const auto& r : rows)
    if (r.size() != first_xs.size())
      throw std::runtime_error("read_density_csv: ragged snapshot blocks");

  // Reconstruct the uniform cell-centered grid from the x column.
  const int n = static_cast<int>(first_xs.size());
  if (n < 4) throw std::runtime_error("read_density_csv: too few cells");
  const double dx = first_xs[1] - first_xs[0];
  const double x_lo = first_xs.front() - 0.5 * dx;
  const double x_hi = first_xs.back() + 0.5 * dx;
  auto grid = Grid::build(n, x_lo, x_hi);
  for (int i = 0; i < n; ++i) {
    if (std::abs(grid->centers[i] - first_xs[i]) > 1e-9 * (1.0 + std::abs(first_xs[i])))
      throw std::runtime_error("read_density_csv: x column is not a uniform grid");
  }

  Trajectory traj;
  traj.grid = grid;
  traj.times = std::move(times);
  traj.snapshots = std::move(rows);
  traj.form = "p_form";
  return traj;
}

void write_ledger_csv(const std::string& path, const Trajectory& traj) {
  std::ostringstream out;
  out << "step,t,mass\n";
  for (const auto& e : traj.mass_ledger)
    out << e.step << ',' << format_double(e.t) << ',' << format_double(e.mass) << '\n';
  atomic_write(path, out.str());
}

void write_eigen_csv(const std::string& path, const std::vector<double>& lambdas,
                     const std::vector<double>& asymptotes) {
  if (lambdas.size() != asymptotes.size())
    throw std::invalid_argument("write_eigen_csv: size mismatch");
  std::ostringstream out;
  out << "k,lambda,asymptote,ratio\n";
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    const double ratio = lambdas[k] / asymptotes[k];
    out << k << ',' << format_double(lambdas[k]) << ',' << format_double(asymptotes[k])
        << ',' << format_double(ratio) << '\n';
  }
  atomic_write(path, out.str());
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_config_file: cannot open " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::string key, value, extra;
    if (!(ls >> key)) continue;  // blank line
    if (!(ls >> value))
      throw std::runtime_error("read_config_file: missing value at line " +
                               std::to_string(line_no));
    if (ls >> extra)
      throw std::runtime_error("read_config_file: trailing tokens at line " +
                               std::to_string(line_no));
    kv[key] = value;
  }
  return kv;
}

std::string canonical_config_string(const std::map<std::string, std::string>& kv) {
  std::ostringstream out;
  for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
  return out.str();
}

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<SvgSeries>& series, bool log_y) {
  const int width = 800, height = 500;
  const int ml = 70, mr = 20, mt = 40, mb = 50;
  const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                           "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

  double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  bool first = true;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      double yv = s.y[i];
      if (log_y) {
        if (!(yv > 0.0)) continue;
        yv = std::log10(yv);
      }
      if (first) {
        x_min = x_max = s.x[i];
        y_min = y_max = yv;
        first = false;
      } else {
        x_min = std::min(x_min, s.x[i]);
        x_max = std::max(x_max, s.x[i]);
        y_min = std::min(y_min, yv);
        y_max = std::max(y_max, yv);
      }
    }
  }
  if (x_max <= x_min) x_max = x_min + 1.0;
  if (y_max <= y_min) y_max = y_min + 1.0;

  auto px = [&](double x) {
    return ml + (x - x_min) / (x_max - x_min) * (width - ml - mr);
  };
  auto py = [&](double y) {
    return height - mb - (y - y_min) / (y_max - y_min) * (height - mt - mb);
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";
  // Axes.
  out << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
      << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
      << height - mb << "\" stroke=\"black\"/>\n";
  for (int tick = 0; tick <= 5; ++tick) {
    const double tx = x_min + (x_max - x_min) * tick / 5.0;
    const double ty = y_min + (y_max - y_min) * tick / 5.0;
    char label[40];
    out << "<line x1=\"" << px(tx) << "\" y1=\"" << height - mb << "\" x2=\"" << px(tx)
        << "\" y2=\"" << height - mb + 5 << "\" stroke=\"black\"/>\n";
    std::snprintf(label, sizeof(label), "%.3g", tx);
    out << "<text x=\"" << px(tx) << "\" y=\"" << height - mb + 20
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << label
        << "</text>\n";
    out << "<line x1=\"" << ml - 5 << "\" y1=\"" << py(ty) << "\" x2=\"" << ml
        << "\" y2=\"" << py(ty) << "\" stroke=\"black\"/>\n";
    if (log_y)
      std::snprintf(label, sizeof(label), "1e%.2g", ty);
    else
      std::snprintf(label, sizeof(label), "%.3g", ty);
    out << "<text x=\"" << ml - 8 << "\" y=\"" << py(ty) + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << label
        << "</text>\n";
  }
  out << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 10
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << x_label
      << "</text>\n";
  out << "<text x=\"18\" y=\"" << (mt + height - mb) / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
      << "transform=\"rotate(-90 18 " << (mt + height - mb) / 2 << ")\">" << y_label
      << "</text>\n";

  int color_idx = 0;
  int legend_y = mt + 6;
  for (const auto& s : series) {
    const char* color = palette[color_idx % 8];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      double yv = s.y[i];
      if (log_y) {
        if (!(yv > 0.0)) continue;
        yv = std::log10(yv);
      }
      out << px(s.x[i]) << ',' << py(yv) << ' ';
    }
    out << "\"/>\n";
    if (!s.label.empty()) {
      out << "<rect x=\"" << width - mr - 150 << "\" y=\"" << legend_y - 8
          << "\" width=\"12\" height=\"3\" fill=\"" << color << "\"/>\n";
      out << "<text x=\"" << width - mr - 132 << "\" y=\"" << legend_y
          << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label << "</text>\n";
      legend_y += 16;
    }
    ++color_idx;
  }
  out << "</svg>\n";
  atomic_write(path, out.str());
}

void write_manifest(const std::string& path, const std::string& subcommand,
                    std::uint64_t config_hash,
                    const std::vector<std::string>& artifact_paths) {
  nlohmann::json j;
  j["version"] = 1;
  j["subcommand"] = subcommand;
  char hex[20];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(config_hash));
  j["config_hash"] = hex;
  j["files"] = nlohmann::json::array();
  for (const auto& p : artifact_paths) {
    nlohmann::json f;
    f["name"] = std::filesystem::path(p).filename().string();
    f["size"] = static_cast<std::uint64_t>(std::filesystem::file_size(p));
    j["files"].push_back(f);
  }
  atomic_write(path, j.dump(2) + "\n");
}

}  // namespace epidiff
