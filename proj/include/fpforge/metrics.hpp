#pragma once

#include <string>
#include <vector>

#include "fpforge/gray_image.hpp"

namespace fpforge {

struct MetricConfig {
  double max_value = 1.0;  // peak signal value
  int ssim_window = 11;    // odd, >= 3
  double k1 = 0.01;
  double k2 = 0.03;
};

// Moment statistics of one sliding window pair.
struct SsimWindowStats {
  double mu_x = 0.0;
  double mu_y = 0.0;
  double sigma_x2 = 0.0;
  double sigma_y2 = 0.0;
  double sigma_xy = 0.0;
};

struct MetricTriple {
  double mse = 0.0;
  double psnr_db = 0.0;
  double ssim = 0.0;
};

struct ReportRow {
  std::string model_name;
  double mean_mse = 0.0;
  double mean_psnr_db = 0.0;
  double mean_ssim = 0.0;
};

struct MetricsReport {
  std::vector<ReportRow> rows;
  std::vector<MetricTriple> per_pair;
};

// PSNR is capped at the MSE = 1e-12 value (120 dB for max_value 1) so
// identical images report a finite number.
constexpr double kPsnrMseFloor = 1e-12;

double mse(const GrayImage& a, const GrayImage& b);
double psnr(const GrayImage& a, const GrayImage& b, const MetricConfig& cfg = {});
double psnr_from_mse(double mse_value, const MetricConfig& cfg = {});

// Mean of the SSIM formula over all stride-1 uniform ssim_window x
// ssim_window windows. Both images must be at least window-sized.
double ssim(const GrayImage& a, const GrayImage& b, const MetricConfig& cfg = {});

// Single-window statistics and formula evaluation, shared with ssim() and
// handy for spot checks.
double ssim_from_stats(const SsimWindowStats& s, const MetricConfig& cfg);

MetricsReport evaluate_pairs(const std::vector<GrayImage>& pred,
                             const std::vector<GrayImage>& truth,
                             const MetricConfig& cfg, const std::string& model_name);

// Appends per-model aggregate rows as one report.
MetricsReport merge_reports(const std::vector<MetricsReport>& reports);

// UTF-8 TSV: header "model\tmse\tpsnr_db\tssim", 6 decimal places.
std::string report_to_tsv(const MetricsReport& report);

}  // namespace fpforge
