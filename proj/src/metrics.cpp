#include "fpforge/metrics.hpp"

#include <cmath>
#include <cstdio>

namespace fpforge {

double mse(const GrayImage& a, const GrayImage& b) {
  require_same_size(a, b, "mse");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.pixels[i] - b.pixels[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

double psnr_from_mse(double mse_value, const MetricConfig& cfg) {
  const double floored = std::max(mse_value, kPsnrMseFloor);
  return 20.0 * std::log10(cfg.max_value / std::sqrt(floored));
}

double psnr(const GrayImage& a, const GrayImage& b, const MetricConfig& cfg) {
  return psnr_from_mse(mse(a, b), cfg);
}

double ssim_from_stats(const SsimWindowStats& s, const MetricConfig& cfg) {
  const double c1 = (cfg.k1 * cfg.max_value) * (cfg.k1 * cfg.max_value);
  const double c2 = (cfg.k2 * cfg.max_value) * (cfg.k2 * cfg.max_value);
  const double num = (2.0 * s.mu_x * s.mu_y + c1) * (2.0 * s.sigma_xy + c2);
  const double den = (s.mu_x * s.mu_x + s.mu_y * s.mu_y + c1) * (s.sigma_x2 + s.sigma_y2 + c2);
  return num / den;
}

double ssim(const GrayImage& a, const GrayImage& b, const MetricConfig& cfg) {
  require_same_size(a, b, "ssim");
  const int w = cfg.ssim_window;
  if (w < 3 || w % 2 == 0) throw InvalidArgument("ssim: window must be odd and >= 3");
  if (a.width < w || a.height < w) throw InvalidArgument("ssim: image smaller than window");

  // Summed-area tables over x, y, x^2, y^2, xy give O(1) window sums.
  const int sw = a.width + 1;
  const int sh = a.height + 1;
  const std::size_t n = static_cast<std::size_t>(sw) * sh;
  std::vector<double> sx(n, 0.0), sy(n, 0.0), sxx(n, 0.0), syy(n, 0.0), sxy(n, 0.0);
  for (int y = 0; y < a.height; ++y) {
    for (int x = 0; x < a.width; ++x) {
      const double va = a.at(x, y);
      const double vb = b.at(x, y);
      const std::size_t i = static_cast<std::size_t>(y + 1) * sw + (x + 1);
      const std::size_t up = i - sw;
      const std::size_t left = i - 1;
      const std::size_t diag = up - 1;
      sx[i] = va + sx[left] + sx[up] - sx[diag];
      sy[i] = vb + sy[left] + sy[up] - sy[diag];
      sxx[i] = va * va + sxx[left] + sxx[up] - sxx[diag];
      syy[i] = vb * vb + syy[left] + syy[up] - syy[diag];
      sxy[i] = va * vb + sxy[left] + sxy[up] - sxy[diag];
    }
  }

  const auto window_sum = [sw, w](const std::vector<double>& s, int x0, int y0) {
    const std::size_t tl = static_cast<std::size_t>(y0) * sw + x0;
    const std::size_t tr = tl + w;
    const std::size_t bl = tl + static_cast<std::size_t>(w) * sw;
    const std::size_t br = bl + w;
    return s[br] - s[tr] - s[bl] + s[tl];
  };

  const double inv_n = 1.0 / (static_cast<double>(w) * w);
  double total = 0.0;
  std::size_t windows = 0;
  for (int y0 = 0; y0 + w <= a.height; ++y0) {
    for (int x0 = 0; x0 + w <= a.width; ++x0) {
      // Raw moment differences, no clamping: for identical inputs the three
      // second moments are bitwise equal, which makes the ratio exactly 1.
      SsimWindowStats st;
      st.mu_x = window_sum(sx, x0, y0) * inv_n;
      st.mu_y = window_sum(sy, x0, y0) * inv_n;
      st.sigma_x2 = window_sum(sxx, x0, y0) * inv_n - st.mu_x * st.mu_x;
      st.sigma_y2 = window_sum(syy, x0, y0) * inv_n - st.mu_y * st.mu_y;
      st.sigma_xy = window_sum(sxy, x0, y0) * inv_n - st.mu_x * st.mu_y;
      total += ssim_from_stats(st, cfg);
      ++windows;
    }
  }
  return total / static_cast<double>(windows);
}

MetricsReport evaluate_pairs(const std::vector<GrayImage>& pred,
                             const std::vector<GrayImage>& truth,
                             const MetricConfig& cfg, const std::string& model_name) {
  if (pred.size() != truth.size())
    throw InvalidArgument("evaluate_pairs: sequence lengths differ");

  MetricsReport report;
  report.per_pair.reserve(pred.size());
  double sum_mse = 0.0, sum_psnr = 0.0, sum_ssim = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    MetricTriple t;
    t.mse = mse(pred[i], truth[i]);
    t.psnr_db = psnr_from_mse(t.mse, cfg);
    t.ssim = ssim(pred[i], truth[i], cfg);
    sum_mse += t.mse;
    sum_psnr += t.psnr_db;
    sum_ssim += t.ssim;
    report.per_pair.push_back(t);
  }
  const double inv = pred.empty() ? 0.0 : 1.0 / static_cast<double>(pred.size());
  report.rows.push_back({model_name, sum_mse * inv, sum_psnr * inv, sum_ssim * inv});
  return report;
}

MetricsReport merge_reports(const std::vector<MetricsReport>& reports) {
  MetricsReport merged;
  for (const MetricsReport& r : reports)
    merged.rows.insert(merged.rows.end(), r.rows.begin(), r.rows.end());
  return merged;
}

std::string report_to_tsv(const MetricsReport& report) {
  std::string out = "model\tmse\tpsnr_db\tssim\n";
  char line[256];
  for (const ReportRow& row : report.rows) {
    std::snprintf(line, sizeof(line), "%s\t%.6f\t%.6f\t%.6f\n", row.model_name.c_str(),
                  row.mean_mse, row.mean_psnr_db, row.mean_ssim);
    out += line;
  }
  return out;
}

}  // namespace fpforge
