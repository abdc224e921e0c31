#include "asw/bench.hpp"
#include "asw/codec.hpp"
#include "asw/corpus.hpp"
#include "asw/decoder.hpp"
#include "asw/distortion.hpp"
#include "asw/image_io.hpp"
#include "asw/metrics.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

namespace {

int cmd_embed(const std::string& in, const std::string& out, const std::string& message,
              asw::DecoderConfig dcfg, const asw::EmbedConfig& ecfg, std::uint64_t rng_seed) {
  const asw::ImageU8 host = asw::load_image(in);
  const asw::WatermarkMessage msg = asw::WatermarkMessage::parse(message, dcfg.message_bits);
  const asw::DecoderWeights weights = asw::build_decoder(dcfg);
  const asw::EmbedResult result =
      asw::embed(dcfg, weights, asw::image_to_tensor(host), msg, ecfg, rng_seed);
  asw::save_png(result.watermarked, out);

  std::printf("message:    %s\n", msg.to_bit_string().c_str());
  std::printf("success:    %s\n", result.success ? "yes" : "no");
  std::printf("psnr_db:    %.2f\n", result.psnr_db);
  std::printf("ssim:       %.4f\n", asw::ssim(result.watermarked, host));
  std::printf("iterations: %d\n", result.iterations_used);
  std::printf("retries:    %d\n", result.retries);
  std::printf("wrote:      %s\n", out.c_str());
  if (!result.success) {
    std::fprintf(stderr, "embedding failed: the written image does not decode to the message\n");
    return 2;
  }
  return 0;
}

int cmd_extract(const std::string& in, const asw::DecoderConfig& dcfg) {
  const asw::DecoderWeights weights = asw::build_decoder(dcfg);
  const asw::WatermarkMessage msg = asw::extract(dcfg, weights, asw::load_image(in));
  std::printf("%s\n", msg.to_bit_string().c_str());
  return 0;
}

int cmd_distort(const std::string& in, const std::string& out, const std::string& kind,
                double level, std::uint64_t noise_seed, const std::string& host_path) {
  const asw::ImageU8 img = asw::load_image(in);
  const asw::DistortionSpec spec = asw::make_spec(kind, level, noise_seed);
  asw::ImageU8 host;
  const asw::ImageU8* host_ptr = nullptr;
  if (!host_path.empty()) {
    host = asw::load_image(host_path);
    host_ptr = &host;
  }
  asw::save_png(asw::apply(img, spec, host_ptr), out);
  std::printf("wrote: %s\n", out.c_str());
  return 0;
}

int cmd_bench(const std::string& plan_path) {
  const asw::BenchPlan plan = asw::load_plan(plan_path);
  const asw::BenchReport report = asw::run_bench(plan);
  std::printf("trials:        %d\n", report.trials);
  std::printf("success rate:  %.3f\n", report.success_rate);
  std::printf("mean psnr:     %.2f dB\n", report.mean_psnr);
  std::printf("mean ssim:     %.4f\n", report.mean_ssim);
  std::printf("%-16s %10s %10s %8s\n", "distortion", "level", "mean_ber", "std_ber");
  for (const asw::CellStats& c : report.cells)
    std::printf("%-16s %10.4g %9.2f%% %7.2f%%\n", c.kind.c_str(), c.level, c.mean_ber, c.std_ber);
  std::printf("reports: %s, %s\n", plan.csv_path.c_str(), plan.json_path.c_str());
  return 0;
}

int cmd_probe(const std::vector<int>& depths, double sigma, int n, std::uint64_t seed,
              int size) {
  const auto table = asw::run_depth_probe(depths, sigma, n, seed, size);
  std::printf("%-6s %12s %12s\n", "depth", "flip+ (%)", "flip- (%)");
  for (const asw::DepthProbeRow& row : table)
    std::printf("%-6d %12.2f %12.2f\n", row.depth, row.flip_rate_plus, row.flip_rate_minus);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Blind image watermarking with a keyed random shallow decoder.\n"
      "The decoder seed is the watermarking key: embedding optimizes the image\n"
      "until the keyed decoder reads out the wanted bits; extraction is one\n"
      "forward pass."};
  app.require_subcommand(1);

  asw::DecoderConfig dcfg;
  asw::EmbedConfig ecfg;

  std::string in, out, message, host_path, kind, plan_path, out_dir;
  std::uint64_t seed = 1, noise_seed = 0, rng_seed = 0;
  bool rng_seed_set = false;
  double level = 0.0, sigma = 10.0 / 255.0;
  int probe_n = 100, probe_size = 128, corpus_n = 16, corpus_size = 256;
  std::vector<int> depths{3, 4, 5, 6};

  auto add_decoder_flags = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Decoder key")->required();
    cmd->add_option("--bits", dcfg.message_bits, "Message length")->capture_default_str();
    cmd->add_option("--depth", dcfg.depth, "Decoder conv depth")->capture_default_str();
    cmd->add_option("--stride", dcfg.front_pool_stride, "Front pooling stride")->capture_default_str();
  };

  CLI::App* embed_cmd = app.add_subcommand("embed", "Embed a message into an image");
  embed_cmd->add_option("--in", in, "Host image (PNG or JPEG)")->required()->check(CLI::ExistingFile);
  embed_cmd->add_option("--out", out, "Output PNG path")->required();
  embed_cmd->add_option("--message", message, "Bit string of length --bits, or hex")->required();
  add_decoder_flags(embed_cmd);
  embed_cmd->add_option("--alpha", ecfg.alpha, "Fidelity weight")->capture_default_str();
  embed_cmd->add_option("--iters", ecfg.iters, "Optimizer step budget")->capture_default_str();
  embed_cmd->add_option("--eta", ecfg.eta, "First trial step")->capture_default_str();
  embed_cmd->add_option("--epsilon", ecfg.epsilon, "Re-embedding ball radius")->capture_default_str();
  embed_cmd->add_option("--rng-seed", rng_seed, "Retry stream seed (default: --seed)")
      ->each([&](const std::string&) { rng_seed_set = true; });

  CLI::App* extract_cmd = app.add_subcommand("extract", "Read the message out of an image");
  extract_cmd->add_option("--in", in, "Image to read")->required()->check(CLI::ExistingFile);
  add_decoder_flags(extract_cmd);

  CLI::App* distort_cmd = app.add_subcommand("distort", "Apply one benchmark distortion");
  distort_cmd->add_option("--in", in, "Input image")->required()->check(CLI::ExistingFile);
  distort_cmd->add_option("--out", out, "Output PNG path")->required();
  distort_cmd
      ->add_option("--kind", kind,
                   "jpeg, gaussian_blur, median_blur, gaussian_noise, poisson_noise, "
                   "salt_pepper, brightness, contrast, saturation, cropout, resize, "
                   "resize_width, rotation")
      ->required();
  distort_cmd->add_option("--level", level, "Strength knob of the kind")->required();
  distort_cmd->add_option("--noise-seed", noise_seed, "Seed for stochastic kinds")->capture_default_str();
  distort_cmd->add_option("--host", host_path, "Host image (cropout only)")
      ->check(CLI::ExistingFile);

  CLI::App* bench_cmd = app.add_subcommand("bench", "Run a benchmark plan");
  bench_cmd->add_option("--plan", plan_path, "Plan JSON")->required()->check(CLI::ExistingFile);

  CLI::App* probe_cmd =
      app.add_subcommand("probe-depth", "Bit flip rate under masked noise per decoder depth");
  probe_cmd->add_option("--depths", depths, "Depths to probe")->capture_default_str()->delimiter(',');
  probe_cmd->add_option("--sigma", sigma, "Noise std on the [0,1] scale")->capture_default_str();
  probe_cmd->add_option("--n", probe_n, "Number of probe images")->capture_default_str();
  probe_cmd->add_option("--seed", seed, "Probe seed")->capture_default_str();
  probe_cmd->add_option("--size", probe_size, "Probe image size")->capture_default_str();

  CLI::App* corpus_cmd = app.add_subcommand("gen-corpus", "Write synthetic benchmark images");
  corpus_cmd->add_option("--out-dir", out_dir, "Target directory")->required();
  corpus_cmd->add_option("--n", corpus_n, "Image count")->capture_default_str();
  corpus_cmd->add_option("--size", corpus_size, "Square image size")->capture_default_str();
  corpus_cmd->add_option("--seed", seed, "Corpus seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*embed_cmd) {
      dcfg.seed = seed;
      return cmd_embed(in, out, message, dcfg, ecfg, rng_seed_set ? rng_seed : seed);
    }
    if (*extract_cmd) {
      dcfg.seed = seed;
      return cmd_extract(in, dcfg);
    }
    if (*distort_cmd) return cmd_distort(in, out, kind, level, noise_seed, host_path);
    if (*bench_cmd) return cmd_bench(plan_path);
    if (*probe_cmd) return cmd_probe(depths, sigma, probe_n, seed, probe_size);
    if (*corpus_cmd) {
      const auto paths = asw::write_corpus(out_dir, corpus_n, corpus_size, seed);
      std::printf("wrote %zu images to %s\n", paths.size(), out_dir.c_str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
