// End-to-end acceptance checks for the watermarking pipeline.
//
// Each criterion prints exactly one PASS/FAIL line with the measured values
// and its pinned tolerance; the process exit code is the number of failing
// criteria. Everything is seeded, so reruns print identical measurements
// apart from the wall-clock figures.

#include <asw/bench.hpp>
#include <asw/codec.hpp>
#include <asw/corpus.hpp>
#include <asw/distortion.hpp>
#include <asw/image_io.hpp>
#include <asw/metrics.hpp>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

using namespace asw;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int g_failures = 0;

void verdict(int id, const char* name, bool pass, const std::string& detail) {
  std::printf("criterion %2d | %s | %-28s | %s\n", id, pass ? "PASS" : "FAIL", name,
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return std::string(buf);
}

std::string join(const std::vector<double>& v, const char* f = "%.2f") {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += "/";
    out += fmt(f, v[i]);
  }
  return out;
}

// One embedding batch: n synthetic hosts, fresh random message each, fixed
// seed schedule so every criterion sees the same batch for the same knobs.
struct Batch {
  DecoderConfig cfg;
  DecoderWeights weights;
  std::vector<ImageU8> hosts;
  std::vector<WatermarkMessage> messages;
  std::vector<EmbedResult> results;
  int successes = 0;
  double mean_psnr = 0.0;  // over successful embeds
  double mean_ssim = 0.0;
  double wall_seconds = 0.0;
};

Batch run_batch(const DecoderConfig& cfg, const EmbedConfig& ec, int n, int size,
                std::uint64_t image_tag, std::uint64_t message_tag, std::uint64_t embed_tag) {
  Batch b;
  b.cfg = cfg;
  b.weights = build_decoder(cfg);
  const auto t0 = Clock::now();
  for (int i = 0; i < n; ++i) {
    const std::uint64_t idx = static_cast<std::uint64_t>(i);
    ImageU8 host = synth_image(size, size, derive_seed(image_tag, idx));
    RandomStream mr(derive_seed(message_tag, idx));
    WatermarkMessage msg = WatermarkMessage::random(cfg.message_bits, mr);
    EmbedResult er = embed(cfg, b.weights, image_to_tensor(host), msg, ec,
                           derive_seed(embed_tag, idx));
    if (er.success) {
      ++b.successes;
      b.mean_psnr += er.psnr_db;
      b.mean_ssim += ssim(er.watermarked, host);
    }
    b.hosts.push_back(std::move(host));
    b.messages.push_back(std::move(msg));
    b.results.push_back(std::move(er));
  }
  b.wall_seconds = seconds_since(t0);
  if (b.successes > 0) {
    b.mean_psnr /= b.successes;
    b.mean_ssim /= b.successes;
  }
  return b;
}

// Mean BER over the batch's successful embeds after one distortion. The
// noise seed is fixed per (cell_tag, image), so every sweep is reproducible.
double mean_ber_under(const Batch& b, const std::string& kind, double level,
                      std::uint64_t cell_tag) {
  double sum = 0.0;
  int n = 0;
  for (size_t i = 0; i < b.results.size(); ++i) {
    if (!b.results[i].success) continue;
    const DistortionSpec spec = make_spec(kind, level, derive_seed(cell_tag, i));
    const ImageU8 distorted = apply(b.results[i].watermarked, spec, &b.hosts[i]);
    const WatermarkMessage got = extract(b.cfg, b.weights, distorted);
    sum += ber_percent(got.bits, b.messages[i].bits);
    ++n;
  }
  return n > 0 ? sum / n : 0.0;
}

bool non_decreasing(const std::vector<double>& v, int max_violations, double slack) {
  int violations = 0;
  for (size_t i = 1; i < v.size(); ++i) {
    if (v[i] < v[i - 1] - 1e-12) {
      ++violations;
      if (v[i - 1] - v[i] > slack) return false;
    }
  }
  return violations <= max_violations;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main() {
  DecoderConfig cfg;  // seed 1, 36 bits, stride 4, depth 3, 64 channels
  EmbedConfig ec;     // alpha 0.75, 25 iterations, eta 0.05, epsilon 0.005
  const int kDesk = 16;
  const int kSize = 256;

  // Shared desk batch: criteria 1, 2, 7, 9, and 11 reuse it, and it doubles
  // as the depth-3 row of criterion 5.
  Batch desk = run_batch(cfg, ec, kDesk, kSize, 11, 107, 7);

  // 1. Clean-channel round trip: nearly every embed must succeed, recover
  //    the exact message, and the batch must finish within the budget.
  {
    double ber = 0.0;
    for (size_t i = 0; i < desk.results.size(); ++i) {
      if (!desk.results[i].success) continue;
      const WatermarkMessage got = extract(cfg, desk.weights, desk.results[i].watermarked);
      ber += ber_percent(got.bits, desk.messages[i].bits);
    }
    if (desk.successes > 0) ber /= desk.successes;
    const bool pass = desk.successes >= 14 && ber == 0.0 && desk.wall_seconds <= 600.0;
    verdict(1, "clean round trip", pass,
            fmt("success=%d/%d (need >=14), ber=%.2f%% (need 0), wall=%.0fs (limit 600)",
                desk.successes, kDesk, ber, desk.wall_seconds));
  }

  // 2. Visual quality of the watermarked images.
  {
    const bool pass = desk.mean_psnr >= 34.0 && desk.mean_psnr <= 45.0 && desk.mean_ssim >= 0.93;
    verdict(2, "visual quality", pass,
            fmt("psnr=%.2fdB (band [34,45]), ssim=%.4f (need >=0.93)", desk.mean_psnr,
                desk.mean_ssim));
  }

  // 3. Analytic input gradient of the full decoder versus central finite
  //    differences in float64.
  {
    const auto t0 = Clock::now();
    const double h = 1e-5;
    double worst = 0.0;
    RandomStream probe_rng(404);
    for (int img = 0; img < 5; ++img) {
      const Tensor x = image_to_tensor(synth_image(128, 128, derive_seed(303, img)));
      RandomStream ur(derive_seed(304, img));
      Tensor u({cfg.message_bits});
      for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = ur.normal();

      DecoderForward fwd = decoder_forward(cfg, desk.weights, x);
      const Tensor grad = backward_input_grad(fwd.tape, u);
      for (int p = 0; p < 40; ++p) {
        const Eigen::Index i =
            static_cast<Eigen::Index>(probe_rng.below(static_cast<std::uint64_t>(x.size())));
        Tensor xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        const double fp = decoder_probs(cfg, desk.weights, xp).vec().dot(u.vec());
        const double fm = decoder_probs(cfg, desk.weights, xm).vec().dot(u.vec());
        const double fd = (fp - fm) / (2.0 * h);
        const double denom = std::max({std::abs(fd), std::abs(grad(i)), 1e-10});
        worst = std::max(worst, std::abs(fd - grad(i)) / denom);
      }
    }
    const double wall = seconds_since(t0);
    const bool pass = worst < 1e-4 && wall <= 120.0;
    verdict(3, "input gradient vs FD", pass,
            fmt("max_rel_err=%.3g (need <1e-4, 200 probes), wall=%.0fs (limit 120)", worst,
                wall));
  }

  // 4. Bit-for-bit reproducibility of a full benchmark run.
  {
    namespace fs = std::filesystem;
    const fs::path work = fs::temp_directory_path() / "asw_acceptance_bench";
    fs::remove_all(work);
    fs::create_directories(work);
    write_corpus((work / "imgs").string(), 4, 128, 21);

    BenchPlan plan;
    plan.image_dir = (work / "imgs").string();
    plan.image_size = 128;
    plan.trials = 4;
    plan.decoder = cfg;
    plan.embedder = ec;
    plan.grid = {{"jpeg", {50}}, {"gaussian_noise", {0.02}}};
    plan.deterministic_output = true;
    plan.csv_path = (work / "a.csv").string();
    plan.json_path = (work / "a.json").string();
    run_bench(plan);
    BenchPlan plan2 = plan;
    plan2.csv_path = (work / "b.csv").string();
    plan2.json_path = (work / "b.json").string();
    run_bench(plan2);

    const bool same_csv = slurp(plan.csv_path) == slurp(plan2.csv_path);
    const bool same_digest =
        build_decoder(cfg).digest_hex() == build_decoder(cfg).digest_hex();
    fs::remove_all(work);
    verdict(4, "deterministic benchmark", same_csv && same_digest,
            fmt("csv_identical=%s, digest_stable=%s (both required)",
                same_csv ? "yes" : "no", same_digest ? "yes" : "no"));
  }

  // 5. Depth ablation: deeper decoders must trade image quality upward and
  //    compression robustness downward.
  std::vector<double> depth_psnr, depth_jpeg;
  {
    depth_psnr.push_back(desk.mean_psnr);
    depth_jpeg.push_back(mean_ber_under(desk, "jpeg", 50, 1050));
    for (int d : {4, 5, 6}) {
      DecoderConfig dc = cfg;
      dc.depth = d;
      Batch b = run_batch(dc, ec, kDesk, kSize, 11, 107, 7);
      depth_psnr.push_back(b.mean_psnr);
      depth_jpeg.push_back(mean_ber_under(b, "jpeg", 50, 1050));
    }
    bool psnr_strict = true;
    for (size_t i = 1; i < depth_psnr.size(); ++i)
      psnr_strict = psnr_strict && depth_psnr[i] > depth_psnr[i - 1];
    const bool jpeg_trend =
        non_decreasing(depth_jpeg, 0, 0.0) && depth_jpeg.back() - depth_jpeg.front() >= 10.0;
    verdict(5, "depth ablation trends", psnr_strict && jpeg_trend,
            fmt("psnr=%s (need strictly rising), jpeg50=%s (need non-decreasing, rise >=10)",
                join(depth_psnr).c_str(), join(depth_jpeg).c_str()));
  }

  // 6. Front-pool ablation: heavier front pooling must help against
  //    compression and hurt against dense noise.
  {
    DecoderConfig s1 = cfg, s8 = cfg;
    s1.front_pool_stride = 1;
    s8.front_pool_stride = 8;
    Batch b1 = run_batch(s1, ec, kDesk, kSize, 11, 107, 7);
    Batch b8 = run_batch(s8, ec, kDesk, kSize, 11, 107, 7);
    const double j1 = mean_ber_under(b1, "jpeg", 50, 1150);
    const double j8 = mean_ber_under(b8, "jpeg", 50, 1150);
    const double p1 = mean_ber_under(b1, "poisson_noise", 0.2, 1151);
    const double p8 = mean_ber_under(b8, "poisson_noise", 0.2, 1151);
    const bool pass = (j8 <= j1 - 5.0) && (p8 >= p1 + 5.0);
    verdict(6, "front-pool ablation", pass,
            fmt("jpeg50 s1=%.2f s8=%.2f (need s8<=s1-5); poisson0.2 s1=%.2f s8=%.2f "
                "(need s8>=s1+5)",
                j1, j8, p1, p8));
  }

  // 7. Robustness spot checks on the desk batch.
  {
    const double blur = mean_ber_under(desk, "gaussian_blur", 7, 1250);
    const double rz = mean_ber_under(desk, "resize", 0.7, 1251);
    const double noise = mean_ber_under(desk, "gaussian_noise", 2.0 / 255.0, 1252);
    const double jpeg = mean_ber_under(desk, "jpeg", 50, 1050);
    const bool pass = blur <= 5.0 && rz <= 2.0 && noise <= 2.0 && jpeg <= 15.0;
    verdict(7, "robustness spot checks", pass,
            fmt("blur7=%.2f (<=5), resize0.7=%.2f (<=2), noise2/255=%.2f (<=2), "
                "jpeg50=%.2f (<=15)",
                blur, rz, noise, jpeg));
  }

  // 8. Decoder sensitivity versus depth, probed with masked noise fields on
  //    unwatermarked images.
  {
    const std::vector<DepthProbeRow> rows = run_depth_probe({3, 4, 5, 6}, 10.0 / 255.0, 60, 5, 128);
    std::vector<double> flips;
    for (const DepthProbeRow& r : rows) flips.push_back(0.5 * (r.flip_rate_plus + r.flip_rate_minus));
    const bool pass = non_decreasing(flips, 1, 1.0) && flips.back() - flips.front() >= 3.0;
    verdict(8, "depth sensitivity probe", pass,
            fmt("flip%%@sigma10/255=%s (need non-decr, <=1 dip <=1pt, d6-d3>=3; gap=%.2f)",
                join(flips).c_str(), flips.back() - flips.front()));
  }

  // 9. Bit errors must grow with distortion strength, family by family.
  {
    std::vector<double> jq, gn, sp;
    for (double q : {90.0, 70.0, 50.0, 30.0})
      jq.push_back(q == 50.0 ? mean_ber_under(desk, "jpeg", 50, 1050)
                             : mean_ber_under(desk, "jpeg", q, 1350));
    for (double s : {2.0, 4.0, 8.0, 16.0})
      gn.push_back(mean_ber_under(desk, "gaussian_noise", s / 255.0, 1351));
    for (double p : {0.01, 0.05, 0.10, 0.15})
      sp.push_back(mean_ber_under(desk, "salt_pepper", p, 1352));
    const bool pass = non_decreasing(jq, 1, 1.0) && non_decreasing(gn, 1, 1.0) &&
                      non_decreasing(sp, 1, 1.0);
    verdict(9, "distortion monotonicity", pass,
            fmt("jpeg=%s; noise=%s; saltpepper=%s (each non-decr, <=1 dip <=1pt)",
                join(jq).c_str(), join(gn).c_str(), join(sp).c_str()));
  }

  // 10. Small-image protocol: 128x128 hosts with a 30-bit message.
  {
    DecoderConfig small = cfg;
    small.message_bits = 30;
    Batch b = run_batch(small, ec, kDesk, 128, 211, 213, 217);
    const double noise = mean_ber_under(b, "gaussian_noise", 0.06, 1450);
    const double rzw = mean_ber_under(b, "resize_width", 0.9, 1451);
    const bool pass = b.mean_psnr >= 33.0 && noise <= 3.0 && rzw <= 2.0 &&
                      b.wall_seconds <= 600.0;
    verdict(10, "small-image protocol", pass,
            fmt("psnr=%.2f (>=33), noise0.06=%.2f (<=3), resize_w0.9=%.2f (<=2), "
                "wall=%.0fs (limit 600)",
                b.mean_psnr, noise, rzw, b.wall_seconds));
  }

  // 11. Key separation: extraction under a wrong decoder seed must carry no
  //     information about the embedded message.
  {
    double match = 0.0;
    int trials = 0;
    for (std::uint64_t wrong = 2; wrong <= 8; ++wrong) {
      DecoderConfig other = cfg;
      other.seed = wrong;
      const DecoderWeights ow = build_decoder(other);
      for (size_t i = 0; i < desk.results.size(); ++i) {
        if (!desk.results[i].success) continue;
        const WatermarkMessage got = extract(other, ow, desk.results[i].watermarked);
        match += 100.0 - ber_percent(got.bits, desk.messages[i].bits);
        ++trials;
      }
    }
    match /= trials;
    const bool pass = trials >= 100 && match >= 45.0 && match <= 55.0;
    verdict(11, "wrong-key separation", pass,
            fmt("bit_match=%.2f%% over %d trials (need 50+-5, >=100 trials)", match, trials));
  }

  // 12. Extraction latency at the desk image size.
  {
    const ImageU8& img = desk.results[0].watermarked;
    extract(cfg, desk.weights, img);  // warm caches
    const int reps = 20;
    const auto t0 = Clock::now();
    for (int i = 0; i < reps; ++i) extract(cfg, desk.weights, img);
    const double ms = seconds_since(t0) * 1000.0 / reps;
    verdict(12, "extraction latency", ms <= 50.0, fmt("%.2fms per extraction (limit 50)", ms));
  }

  std::printf("summary: %d/12 criteria passed\n", 12 - g_failures);
  return g_failures;
}
