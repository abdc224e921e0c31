#include "asw/bench.hpp"

#include "asw/corpus.hpp"
#include "asw/distortion.hpp"
#include "asw/image_io.hpp"
#include "asw/metrics.hpp"
#include "asw/rng.hpp"

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <thread>

namespace asw {

namespace {

using nlohmann::json;

double elapsed_ms(std::chrono::steady_clock::time_point from) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - from)
      .count();
}

int thread_budget(int trials) {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("ASW_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) n = std::min(n, cap);
  }
  return std::max(1, std::min(n, trials));
}

struct LoadedImage {
  std::string name;
  ImageU8 pixels;
};

std::vector<LoadedImage> gather_images(const BenchPlan& plan) {
  std::vector<std::string> files;
  for (const auto& entry : std::filesystem::directory_iterator(plan.image_dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());

  std::vector<LoadedImage> images;
  for (const std::string& path : files) {
    if (static_cast<int>(images.size()) == plan.trials) break;
    try {
      ImageU8 img = load_image(path);
      if (img.width != plan.image_size || img.height != plan.image_size)
        img = resize_bilinear(img, plan.image_size, plan.image_size);
      images.push_back({std::filesystem::path(path).filename().string(), std::move(img)});
    } catch (const std::exception& e) {
      std::cerr << "bench: skipping " << path << ": " << e.what() << "\n";
    }
  }
  if (images.empty()) throw std::runtime_error("bench: no loadable images in " + plan.image_dir);
  if (static_cast<int>(images.size()) < plan.trials)
    std::cerr << "bench: only " << images.size() << " of " << plan.trials
              << " requested images are available\n";
  return images;
}

struct TrialOutput {
  std::vector<TrialRow> rows;
  bool success = false;
  double extract_ms = 0.0;
};

TrialOutput run_trial(const BenchPlan& plan, const DecoderWeights& weights,
                      const LoadedImage& input, int index) {
  const std::uint64_t base = derive_seed(plan.decoder.seed, static_cast<std::uint64_t>(index));
  RandomStream msg_rng(derive_seed(base, 2));
  const WatermarkMessage msg = WatermarkMessage::random(plan.decoder.message_bits, msg_rng);
  const Tensor host = image_to_tensor(input.pixels);

  auto t0 = std::chrono::steady_clock::now();
  const EmbedResult er =
      embed(plan.decoder, weights, host, msg, plan.embedder, derive_seed(base, 1));
  const double embed_ms = elapsed_ms(t0);

  TrialOutput out;
  out.success = er.success;

  t0 = std::chrono::steady_clock::now();
  const WatermarkMessage clean_bits = extract(plan.decoder, weights, er.watermarked);
  out.extract_ms = elapsed_ms(t0);

  TrialRow clean;
  clean.image = input.name;
  clean.distortion = "clean";
  clean.level = 0.0;
  clean.ber = ber_percent(clean_bits.bits, msg.bits);
  clean.psnr_db = er.psnr_db;
  clean.ssim = ssim(er.watermarked, input.pixels);
  clean.iters = er.iterations_used;
  clean.retries = er.retries;
  clean.wall_ms = embed_ms;
  out.rows.push_back(std::move(clean));

  for (const GridCell& cell : plan.grid)
    for (double level : cell.levels) {
      const DistortionSpec spec = make_spec(cell.kind, level, base);
      t0 = std::chrono::steady_clock::now();
      const ImageU8 distorted = apply(er.watermarked, spec, &input.pixels);
      const WatermarkMessage got = extract(plan.decoder, weights, distorted);
      TrialRow row;
      row.wall_ms = elapsed_ms(t0);
      row.image = input.name;
      row.distortion = cell.kind;
      row.level = level;
      row.ber = ber_percent(got.bits, msg.bits);
      row.psnr_db = psnr(distorted, er.watermarked);
      row.ssim = ssim(distorted, er.watermarked);
      row.iters = er.iterations_used;
      row.retries = er.retries;
      out.rows.push_back(std::move(row));
    }
  return out;
}

void write_csv(const BenchPlan& plan, const std::vector<TrialRow>& rows) {
  std::ofstream out(plan.csv_path, std::ios::binary);
  if (!out) throw std::runtime_error("bench: cannot write " + plan.csv_path);
  out << "image,distortion,level,ber,psnr,ssim,iters,retries,wall_ms\n";
  char buf[256];
  for (const TrialRow& r : rows) {
    std::snprintf(buf, sizeof buf, ",%.6g,%.6f,%.6f,%.8f,%d,%d,%.3f\n", r.level, r.ber,
                  r.psnr_db, r.ssim, r.iters, r.retries,
                  plan.deterministic_output ? 0.0 : r.wall_ms);
    out << r.image << ',' << r.distortion << buf;
  }
}

void write_json(const BenchPlan& plan, const BenchReport& report,
                const DecoderWeights& weights) {
  json cells = json::array();
  for (const CellStats& c : report.cells)
    cells.push_back({{"kind", c.kind},
                     {"level", c.level},
                     {"mean_ber", c.mean_ber},
                     {"std_ber", c.std_ber},
                     {"n", c.n}});
  const json j = {
      {"cells", cells},
      {"clean_ber_over_successes", report.clean_ber_over_successes},
      {"decoder_digest", weights.digest_hex()},
      {"mean_embed_ms", plan.deterministic_output ? 0.0 : report.mean_embed_ms},
      {"mean_extract_ms", plan.deterministic_output ? 0.0 : report.mean_extract_ms},
      {"mean_psnr", report.mean_psnr},
      {"mean_ssim", report.mean_ssim},
      {"success_rate", report.success_rate},
      {"trials", report.trials},
  };
  std::ofstream out(plan.json_path, std::ios::binary);
  if (!out) throw std::runtime_error("bench: cannot write " + plan.json_path);
  out << j.dump(2) << "\n";
}

CellStats stats_for(const std::vector<TrialRow>& rows, const std::string& kind, double level) {
  CellStats st;
  st.kind = kind;
  st.level = level;
  double sum = 0.0, sq = 0.0;
  for (const TrialRow& r : rows)
    if (r.distortion == kind && r.level == level) {
      sum += r.ber;
      sq += r.ber * r.ber;
      ++st.n;
    }
  if (st.n > 0) {
    st.mean_ber = sum / st.n;
    st.std_ber = std::sqrt(std::max(0.0, sq / st.n - st.mean_ber * st.mean_ber));
  }
  return st;
}

}  // namespace

void BenchPlan::validate() const {
  decoder.validate();
  embedder.validate();
  detail::check(!image_dir.empty(), "bench: image_dir is required");
  detail::check(image_size >= 16, "bench: image_size must be >= 16");
  detail::check(trials >= 1, "bench: trials must be >= 1");
  detail::check(!csv_path.empty() && !json_path.empty(), "bench: report paths are required");
  for (const GridCell& cell : grid) {
    detail::check(!cell.levels.empty(), "bench: grid cell without levels");
    for (double level : cell.levels) make_spec(cell.kind, level, 0);  // validates both
  }
}

BenchPlan load_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open plan " + path);
  json j = json::parse(in);

  BenchPlan plan;
  plan.image_dir = j.at("image_dir").get<std::string>();
  plan.image_size = j.value("image_size", plan.image_size);
  plan.trials = j.value("trials", plan.trials);
  plan.csv_path = j.value("csv_path", plan.csv_path);
  plan.json_path = j.value("json_path", plan.json_path);
  plan.deterministic_output = j.value("deterministic_output", plan.deterministic_output);
  plan.decoder.message_bits = j.value("message_bits", plan.decoder.message_bits);

  if (j.contains("decoder")) {
    const json& d = j["decoder"];
    plan.decoder.seed = d.value("seed", plan.decoder.seed);
    plan.decoder.front_pool_stride = d.value("stride", plan.decoder.front_pool_stride);
    plan.decoder.depth = d.value("depth", plan.decoder.depth);
    plan.decoder.channels = d.value("channels", plan.decoder.channels);
    plan.decoder.kernel_size = d.value("kernel", plan.decoder.kernel_size);
  }
  if (j.contains("embed")) {
    const json& e = j["embed"];
    plan.embedder.alpha = e.value("alpha", plan.embedder.alpha);
    plan.embedder.iters = e.value("iters", plan.embedder.iters);
    plan.embedder.eta = e.value("eta", plan.embedder.eta);
    plan.embedder.epsilon = e.value("epsilon", plan.embedder.epsilon);
    plan.embedder.psnr_floor_db = e.value("psnr_floor_db", plan.embedder.psnr_floor_db);
    plan.embedder.max_retries = e.value("max_retries", plan.embedder.max_retries);
    plan.embedder.conv_tol = e.value("conv_tol", plan.embedder.conv_tol);
    plan.embedder.conv_window = e.value("conv_window", plan.embedder.conv_window);
  }
  for (const json& cell : j.value("grid", json::array()))
    plan.grid.push_back({cell.at("kind").get<std::string>(),
                         cell.at("levels").get<std::vector<double>>()});
  plan.validate();
  return plan;
}

BenchReport run_bench(const BenchPlan& plan) {
  plan.validate();
  const DecoderWeights weights = build_decoder(plan.decoder);
  const std::vector<LoadedImage> images = gather_images(plan);
  const int n = static_cast<int>(images.size());

  std::vector<TrialOutput> outputs(static_cast<size_t>(n));
  const int threads = thread_budget(n);
  if (threads == 1) {
    for (int i = 0; i < n; ++i) outputs[static_cast<size_t>(i)] = run_trial(plan, weights, images[static_cast<size_t>(i)], i);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        for (int i = t; i < n; i += threads)
          outputs[static_cast<size_t>(i)] = run_trial(plan, weights, images[static_cast<size_t>(i)], i);
      });
    for (std::thread& th : pool) th.join();
  }

  BenchReport report;
  report.trials = n;
  int successes = 0;
  double clean_ber_success_sum = 0.0, extract_ms_sum = 0.0;
  for (const TrialOutput& out : outputs) {
    const TrialRow& clean = out.rows.front();
    report.mean_psnr += clean.psnr_db;
    report.mean_ssim += clean.ssim;
    report.mean_embed_ms += clean.wall_ms;
    extract_ms_sum += out.extract_ms;
    if (out.success) {
      ++successes;
      clean_ber_success_sum += clean.ber;
    }
    report.rows.insert(report.rows.end(), out.rows.begin(), out.rows.end());
  }
  report.mean_psnr /= n;
  report.mean_ssim /= n;
  report.mean_embed_ms /= n;
  report.mean_extract_ms = extract_ms_sum / n;
  report.success_rate = static_cast<double>(successes) / n;
  report.clean_ber_over_successes = successes > 0 ? clean_ber_success_sum / successes : 0.0;

  report.cells.push_back(stats_for(report.rows, "clean", 0.0));
  for (const GridCell& cell : plan.grid)
    for (double level : cell.levels) report.cells.push_back(stats_for(report.rows, cell.kind, level));

  write_csv(plan, report.rows);
  write_json(plan, report, weights);
  return report;
}

std::vector<DepthProbeRow> run_depth_probe(const std::vector<int>& depths, double sigma,
                                           int n_images, std::uint64_t seed, int image_size) {
  detail::check(!depths.empty(), "depth probe: depths must be non-empty");
  for (int d : depths) detail::check(d >= 3 && d <= 8, "depth probe: depths must be in [3,8]");
  detail::check(sigma >= 0.0, "depth probe: sigma must be >= 0");
  detail::check(n_images >= 1, "depth probe: n_images must be >= 1");

  std::vector<Tensor> hosts;
  std::vector<OrthogonalNoisePair> noise;
  hosts.reserve(static_cast<size_t>(n_images));
  noise.reserve(static_cast<size_t>(n_images));
  for (int i = 0; i < n_images; ++i) {
    const std::uint64_t si = static_cast<std::uint64_t>(i);
    hosts.push_back(image_to_tensor(
        synth_image(image_size, image_size, derive_seed(seed, 500000 + si))));
    noise.push_back(make_orthogonal_noise(3, image_size, image_size, sigma,
                                          derive_seed(seed, 900000 + si)));
  }

  std::vector<DepthProbeRow> table;
  for (int d : depths) {
    DecoderConfig cfg;
    cfg.seed = std::max<std::uint64_t>(seed, 1);
    cfg.depth = d;
    const DecoderWeights w = build_decoder(cfg);

    long long flips_plus = 0, flips_minus = 0, total = 0;
    for (int i = 0; i < n_images; ++i) {
      const Tensor& x = hosts[static_cast<size_t>(i)];
      const std::vector<int> bits = extract_message(cfg, w, x);
      Tensor xp = x, xm = x;
      xp.vec() += noise[static_cast<size_t>(i)].n_plus.vec();
      xm.vec() += noise[static_cast<size_t>(i)].n_minus.vec();
      const std::vector<int> bp = extract_message(cfg, w, xp);
      const std::vector<int> bm = extract_message(cfg, w, xm);
      for (size_t b = 0; b < bits.size(); ++b) {
        flips_plus += bits[b] != bp[b];
        flips_minus += bits[b] != bm[b];
      }
      total += static_cast<long long>(bits.size());
    }
    table.push_back({d, 100.0 * static_cast<double>(flips_plus) / static_cast<double>(total),
                     100.0 * static_cast<double>(flips_minus) / static_cast<double>(total)});
  }
  return table;
}

}  // namespace asw
