#pragma once

#include "asw/codec.hpp"
#include "asw/decoder.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace asw {

struct GridCell {
  std::string kind;            // a distortion label accepted by make_spec()
  std::vector<double> levels;
};

/// One benchmark run: embed a fresh random message into each image, then
/// sweep every (distortion, level) grid cell over the watermarked images.
///
/// Seed policy: the decoder seed is the run key kappa. Image i derives
/// base_i = derive_seed(kappa, i); its distortions use noise seed base_i,
/// the embedder uses derive_seed(base_i, 1) and the message comes from
/// derive_seed(base_i, 2). Every report byte is determined by the plan.
struct BenchPlan {
  std::string image_dir;
  int image_size = 256;  // inputs are resampled to size x size when needed
  int trials = 16;       // images consumed from image_dir in sorted name order
  DecoderConfig decoder;
  EmbedConfig embedder;
  std::vector<GridCell> grid;
  std::string csv_path = "bench_trials.csv";
  std::string json_path = "bench_report.json";
  bool deterministic_output = false;  // write all wall-time fields as zero

  void validate() const;
};

/// Reads a plan from JSON; missing fields keep the defaults above.
BenchPlan load_plan(const std::string& path);

/// One CSV line. Clean rows carry the embed outcome (ber from a fresh
/// extraction, psnr/ssim of watermarked vs host, wall_ms = embed time);
/// distortion rows carry ber after the attack, psnr/ssim of the distorted
/// image vs the watermarked one, and wall_ms = distort + extract time.
struct TrialRow {
  std::string image;
  std::string distortion;  // "clean" or a distortion label
  double level = 0.0;
  double ber = 0.0;
  double psnr_db = 0.0;
  double ssim = 0.0;
  int iters = 0;
  int retries = 0;
  double wall_ms = 0.0;
};

struct CellStats {
  std::string kind;
  double level = 0.0;
  double mean_ber = 0.0;
  double std_ber = 0.0;  // population std over the cell's trials
  int n = 0;
};

struct BenchReport {
  std::vector<TrialRow> rows;
  std::vector<CellStats> cells;  // "clean" first, then grid order
  double mean_psnr = 0.0;        // over all trials' clean rows
  double mean_ssim = 0.0;
  double success_rate = 0.0;
  double clean_ber_over_successes = 0.0;
  double mean_embed_ms = 0.0;
  double mean_extract_ms = 0.0;
  int trials = 0;
};

/// Runs the plan, writes the per-trial CSV and the aggregate JSON, and
/// returns the aggregates. Honors ASW_THREADS (default: hardware threads)
/// for trial-level parallelism; results do not depend on the thread count.
BenchReport run_bench(const BenchPlan& plan);

/// Decoder depth sensitivity probe: percentage of output bits flipped when
/// masked Gaussian noise fields (disjoint-support pair, std sigma) are added
/// to synthetic images, per depth. All decoders share one seed so shallower
/// networks are prefixes of deeper ones.
struct DepthProbeRow {
  int depth = 0;
  double flip_rate_plus = 0.0;   // percent
  double flip_rate_minus = 0.0;  // percent
};

std::vector<DepthProbeRow> run_depth_probe(const std::vector<int>& depths, double sigma,
                                           int n_images, std::uint64_t seed,
                                           int image_size = 128);

}  // namespace asw
