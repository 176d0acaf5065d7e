// Copyright 2026 The speechcmd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "speechcmd/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "speechcmd/errors.hpp"
#include "speechcmd/labels.hpp"

namespace speechcmd {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

std::string slurp_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IOError("cannot write " + path.string());
  out << text;
  if (!out) throw IOError("write failed for " + path.string());
}

template <typename T>
T parse_field(const std::string& s, std::size_t line_offset) {
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw FormatError("cannot parse \"" + s + "\" as a number", line_offset);
  return value;
}

std::string class_label(std::size_t c, std::size_t n) {
  if (n == static_cast<std::size_t>(kNumClasses)) return std::string(class_name(static_cast<int>(c)));
  return "class" + std::to_string(c);
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string history_to_csv(const TrainHistory& history) {
  std::string out = "epoch,train_loss,train_acc,val_loss,val_acc,seconds\n";
  for (const auto& e : history.epochs) {
    out += std::to_string(e.epoch) + ',' + format_number(e.train_loss) + ',' +
           format_number(e.train_acc) + ',' + format_number(e.val_loss) + ',' +
           format_number(e.val_acc) + ',' + format_number(e.seconds) + '\n';
  }
  return out;
}

void write_history_csv(const TrainHistory& history, const fs::path& path) {
  write_text(path, history_to_csv(history));
}

TrainHistory read_history_csv(const fs::path& path) {
  const auto lines = split_lines(slurp_text(path));
  if (lines.empty() || lines.front() != "epoch,train_loss,train_acc,val_loss,val_acc,seconds")
    throw FormatError("history CSV: unexpected header", 0);
  TrainHistory h;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_fields(lines[i]);
    if (f.size() != 6) throw FormatError("history CSV: expected 6 fields on line " + std::to_string(i + 1), 0);
    EpochRecord e;
    e.epoch = parse_field<std::size_t>(f[0], i);
    e.train_loss = parse_field<double>(f[1], i);
    e.train_acc = parse_field<double>(f[2], i);
    e.val_loss = parse_field<double>(f[3], i);
    e.val_acc = parse_field<double>(f[4], i);
    e.seconds = parse_field<double>(f[5], i);
    h.epochs.push_back(e);
  }
  return h;
}

std::string confusion_to_csv(const ConfusionMatrix& cm) {
  const std::size_t n = cm.n_classes();
  std::string out = "true\\predicted";
  for (std::size_t p = 0; p < n; ++p) out += ',' + class_label(p, n);
  out += '\n';
  for (std::size_t t = 0; t < n; ++t) {
    out += class_label(t, n);
    for (std::size_t p = 0; p < n; ++p) out += ',' + std::to_string(cm.at(t, p));
    out += '\n';
  }
  return out;
}

ConfusionMatrix confusion_from_csv(const std::string& text) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw FormatError("confusion CSV: empty", 0);
  const auto header = split_fields(lines.front());
  if (header.size() < 2) throw FormatError("confusion CSV: header too short", 0);
  const std::size_t n = header.size() - 1;
  if (lines.size() != n + 1)
    throw FormatError("confusion CSV: expected " + std::to_string(n) + " data rows", 0);
  for (std::size_t p = 0; p < n; ++p)
    if (header[p + 1] != class_label(p, n))
      throw FormatError("confusion CSV: column " + std::to_string(p + 1) + " is \"" + header[p + 1] +
                            "\", expected \"" + class_label(p, n) + "\"",
                        0);
  ConfusionMatrix cm(n);
  for (std::size_t t = 0; t < n; ++t) {
    const auto f = split_fields(lines[t + 1]);
    if (f.size() != n + 1 || f[0] != class_label(t, n))
      throw FormatError("confusion CSV: malformed row " + std::to_string(t + 2), 0);
    for (std::size_t p = 0; p < n; ++p) cm.at(t, p) = parse_field<std::uint64_t>(f[p + 1], t + 1);
  }
  return cm;
}

ConfusionMatrix read_confusion_csv(const fs::path& path) {
  return confusion_from_csv(slurp_text(path));
}

std::string metrics_to_csv(const MetricReport& report, const ConfusionMatrix& cm) {
  const std::size_t n = cm.n_classes();
  std::string out = "metric,name,value\n";
  auto row = [&](const std::string& metric, const std::string& name, double v) {
    out += metric + ',' + name + ',' + format_number(v) + '\n';
  };
  row("accuracy", "overall", report.overall_accuracy);
  for (const auto& [label, avg] : {std::pair{"macro", &report.macro}, std::pair{"micro", &report.micro}}) {
    row("ovr_accuracy", label, avg->accuracy);
    row("precision", label, avg->precision);
    row("recall", label, avg->recall);
    row("f1", label, avg->f1);
    row("specificity", label, avg->specificity);
  }
  const auto diag = per_class_accuracy(cm);
  for (std::size_t c = 0; c < n; ++c) {
    const auto& m = report.per_class[c];
    const std::string name = class_label(c, n);
    row("ovr_accuracy", name, m.accuracy);
    row("precision", name, m.precision);
    row("recall", name, m.recall);
    row("f1", name, m.f1);
    row("specificity", name, m.specificity);
    row("class_accuracy", name, diag[c].value_or(0.0));
  }
  return out;
}

std::string render_curves_svg(const TrainHistory& history) {
  constexpr double kWidth = 640, kPanelHeight = 240, kLeft = 60, kRight = 20, kTop = 30, kGap = 50;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kPanelHeight - kTop - 30;
  const std::size_t n = history.epochs.size();

  double max_loss = 0.0;
  for (const auto& e : history.epochs) max_loss = std::max({max_loss, e.train_loss, e.val_loss});
  if (max_loss <= 0.0) max_loss = 1.0;

  auto x_of = [&](std::size_t i) {
    return kLeft + (n <= 1 ? plot_w / 2 : plot_w * static_cast<double>(i) / static_cast<double>(n - 1));
  };

  std::ostringstream svg;
  const double height = 2 * kPanelHeight + kGap;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  struct Series {
    const char* name;
    const char* color;
    double EpochRecord::*field;
  };
  struct Panel {
    const char* title;
    double y_max;
    Series a, b;
  };
  const Panel panels[] = {
      {"Accuracy", 1.0, {"train", "#1f77b4", &EpochRecord::train_acc}, {"validation", "#d62728", &EpochRecord::val_acc}},
      {"Loss", max_loss, {"train", "#1f77b4", &EpochRecord::train_loss}, {"validation", "#d62728", &EpochRecord::val_loss}},
  };

  for (std::size_t pi = 0; pi < 2; ++pi) {
    const Panel& panel = panels[pi];
    const double y0 = pi * (kPanelHeight + kGap) + kTop;
    auto y_of = [&](double v) { return y0 + plot_h * (1.0 - v / panel.y_max); };
    svg << "<g class=\"panel\" id=\"" << (pi == 0 ? "accuracy" : "loss") << "\">\n";
    svg << "<text x=\"" << kLeft << "\" y=\"" << y0 - 10 << "\" font-size=\"13\">" << panel.title
        << " vs epoch</text>\n";
    svg << "<rect x=\"" << kLeft << "\" y=\"" << y0 << "\" width=\"" << plot_w << "\" height=\"" << plot_h
        << "\" fill=\"none\" stroke=\"#888\"/>\n";
    for (int tick = 0; tick <= 4; ++tick) {
      const double v = panel.y_max * tick / 4.0;
      svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << y_of(v) + 4 << "\" text-anchor=\"end\">"
          << fixed(v, 2) << "</text>\n";
    }
    for (std::size_t i = 0; i < n; ++i)
      svg << "<text x=\"" << x_of(i) << "\" y=\"" << y0 + plot_h + 14 << "\" text-anchor=\"middle\">"
          << history.epochs[i].epoch << "</text>\n";
    for (const Series* s : {&panel.a, &panel.b}) {
      svg << "<polyline class=\"" << s->name << "\" fill=\"none\" stroke=\"" << s->color << "\" points=\"";
      for (std::size_t i = 0; i < n; ++i)
        svg << (i ? " " : "") << x_of(i) << ',' << y_of(history.epochs[i].*(s->field));
      svg << "\"/>\n";
      for (std::size_t i = 0; i < n; ++i)
        svg << "<circle class=\"point " << s->name << "\" cx=\"" << x_of(i) << "\" cy=\""
            << y_of(history.epochs[i].*(s->field)) << "\" r=\"2.5\" fill=\"" << s->color << "\"/>\n";
    }
    svg << "<text x=\"" << kLeft + plot_w - 4 << "\" y=\"" << y0 + 14
        << "\" text-anchor=\"end\" fill=\"#1f77b4\">train</text>\n";
    svg << "<text x=\"" << kLeft + plot_w - 4 << "\" y=\"" << y0 + 28
        << "\" text-anchor=\"end\" fill=\"#d62728\">validation</text>\n";
    svg << "</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string render_confusion_svg(const ConfusionMatrix& cm) {
  constexpr double kCell = 44, kLeft = 90, kTop = 90;
  const std::size_t n = cm.n_classes();
  const double size = kLeft + kCell * static_cast<double>(n) + 20;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size + 20
      << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kLeft << "\" y=\"16\" font-size=\"13\">Confusion matrix (row %, true vs predicted)</text>\n";
  for (std::size_t c = 0; c < n; ++c) {
    const std::string name = xml_escape(class_label(c, n));
    const double mid = kTop + kCell * (static_cast<double>(c) + 0.5);
    svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << mid + 4 << "\" text-anchor=\"end\">" << name << "</text>\n";
    svg << "<text transform=\"translate(" << kLeft + kCell * (static_cast<double>(c) + 0.5) << ',' << kTop - 6
        << ") rotate(-60)\">" << name << "</text>\n";
  }
  for (std::size_t t = 0; t < n; ++t) {
    const std::uint64_t row = cm.row_sum(t);
    for (std::size_t p = 0; p < n; ++p) {
      const double pct = row ? 100.0 * static_cast<double>(cm.at(t, p)) / static_cast<double>(row) : 0.0;
      const double x = kLeft + kCell * static_cast<double>(p);
      const double y = kTop + kCell * static_cast<double>(t);
      const int shade = static_cast<int>(std::lround(255.0 - 2.2 * pct));
      const char* fill_rgb = t == p ? "rgb(%d,%d,255)" : "rgb(255,%d,%d)";
      char fill[32];
      std::snprintf(fill, sizeof fill, fill_rgb, shade, shade);
      svg << "<rect class=\"cell\" data-true=\"" << t << "\" data-pred=\"" << p << "\" data-pct=\""
          << fixed(pct, 2) << "\" x=\"" << x << "\" y=\"" << y << "\" width=\"" << kCell << "\" height=\""
          << kCell << "\" fill=\"" << fill << "\" stroke=\"#ccc\"/>\n";
      if (cm.at(t, p) > 0)
        svg << "<text x=\"" << x + kCell / 2 << "\" y=\"" << y + kCell / 2 + 3
            << "\" text-anchor=\"middle\" fill=\"" << (pct > 60 ? "white" : "black") << "\">"
            << fixed(pct, 1) << "</text>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

ReportFiles render_report(const MetricReport& report, const ConfusionMatrix& cm,
                          const TrainHistory& history, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IOError("cannot create " + out_dir.string() + ": " + ec.message());
  ReportFiles files;
  files.metrics_csv = out_dir / "metrics.csv";
  files.confusion_csv = out_dir / "confusion.csv";
  files.confusion_svg = out_dir / "confusion.svg";
  write_text(files.metrics_csv, metrics_to_csv(report, cm));
  write_text(files.confusion_csv, confusion_to_csv(cm));
  write_text(files.confusion_svg, render_confusion_svg(cm));
  if (!history.epochs.empty()) {
    files.curves_svg = out_dir / "curves.svg";
    write_text(files.curves_svg, render_curves_svg(history));
  }
  return files;
}

}  // namespace speechcmd
