#include "asw/codec.hpp"

#include "asw/lbfgs.hpp"
#include "asw/metrics.hpp"
#include "asw/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace asw {

namespace {

constexpr double kProbClamp = 1e-12;

double clamp_prob(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }

struct Evaluation {
  double lw = 0.0;
  double li = 0.0;
  double lall = 0.0;
  Tensor probs;
  Eigen::VectorXd grad;  // dL_all / dpixels, flattened
};

Evaluation evaluate(const DecoderConfig& cfg, const DecoderWeights& w, const Tensor& x,
                    const Tensor& host, const WatermarkMessage& msg, double alpha) {
  DecoderForward fwd = decoder_forward(cfg, w, x);
  const int t = msg.length();

  Evaluation ev;
  ev.lw = watermark_loss(fwd.probs, msg);
  ev.li = image_loss(x, host);
  ev.lall = ev.lw + alpha * ev.li;

  // Gradient of the mean BCE taken in sigmoid-composite form: dL/dlogit_i is
  // exactly (p_i - w_i)/t, which stays informative however saturated a bit
  // is, where chaining through the clamped probability would not. The final
  // tape record is the sigmoid; the cotangent enters at its input.
  Tensor dz({t});
  for (int i = 0; i < t; ++i) {
    dz(i) = (fwd.probs(i) - static_cast<double>(msg.bits[static_cast<size_t>(i)])) / t;
  }
  detail::check(std::holds_alternative<SigmoidRecord<double>>(fwd.tape.records.back()),
                "embed: expected sigmoid as the final tape record");
  fwd.tape.records.pop_back();
  Tensor gx = backward_input_grad(fwd.tape, dz);
  const double n = static_cast<double>(x.size());
  ev.grad = gx.vec() + (2.0 * alpha / n) * (x.vec() - host.vec());
  ev.probs = std::move(fwd.probs);
  return ev;
}

// Relative change of the last trace entry against each of the previous
// `window` entries; needs a full window of history.
bool trace_converged(const std::vector<double>& trace, double tol, int window) {
  const int n = static_cast<int>(trace.size());
  if (n < window + 1) return false;
  const double last = trace[static_cast<size_t>(n - 1)];
  for (int j = 1; j <= window; ++j) {
    const double ref = trace[static_cast<size_t>(n - 1 - j)];
    if (std::abs(last - ref) / std::max(ref, 1e-8) >= tol) return false;
  }
  return true;
}

struct Attempt {
  ImageU8 image;
  bool ok = false;
  int iterations = 0;
  double lw = 0.0, li = 0.0, lall = 0.0;
  double psnr_db = 0.0;
  std::vector<double> trace;
};

Attempt run_attempt(const DecoderConfig& cfg, const DecoderWeights& w, const Tensor& host,
                    const ImageU8& host_img, const Tensor& x0, const WatermarkMessage& msg,
                    const EmbedConfig& ec) {
  Tensor x = x0;
  Tensor scratch = x0;
  const auto objective = [&](const Eigen::VectorXd& v) {
    scratch.vec() = v;
    const Tensor probs = decoder_probs(cfg, w, scratch);
    return watermark_loss(probs, msg) + ec.alpha * image_loss(scratch, host);
  };

  Attempt at;
  Evaluation ev = evaluate(cfg, w, x, host, msg, ec.alpha);
  at.trace.push_back(ev.lall);

  // Nothing to optimize when the start point already decodes to the message.
  if (threshold_bits(ev.probs) != msg.bits) {
    LbfgsState state;
    bool reset_used = false;
    for (int step = 1; step <= ec.iters; ++step) {
      const LbfgsStepResult r = state.step(x.vec(), ev.lall, ev.grad, objective, ec.eta);
      if (r.line_search_failed) {
        if (reset_used) break;  // stuck even with fresh history; keep the iterate
        state.reset();
        reset_used = true;
        at.iterations = step;
        continue;
      }
      reset_used = false;
      x.vec() = r.x.cwiseMax(0.0).cwiseMin(1.0);
      ev = evaluate(cfg, w, x, host, msg, ec.alpha);
      at.trace.push_back(ev.lall);
      at.iterations = step;
      if (threshold_bits(ev.probs) == msg.bits &&
          trace_converged(at.trace, ec.conv_tol, ec.conv_window))
        break;
    }
  }

  at.image = tensor_to_image(x);
  at.psnr_db = psnr(at.image, host_img);
  at.ok = extract(cfg, w, at.image) == msg && at.psnr_db >= ec.psnr_floor_db;
  at.lw = ev.lw;
  at.li = ev.li;
  at.lall = ev.lall;
  return at;
}

}  // namespace

void EmbedConfig::validate() const {
  detail::check(alpha >= 0.0, "EmbedConfig: alpha must be >= 0");
  detail::check(iters >= 1, "EmbedConfig: iters must be >= 1");
  detail::check(eta > 0.0, "EmbedConfig: eta must be > 0");
  detail::check(epsilon >= 0.0, "EmbedConfig: epsilon must be >= 0");
  detail::check(max_retries >= 0, "EmbedConfig: max_retries must be >= 0");
  detail::check(conv_tol > 0.0, "EmbedConfig: conv_tol must be > 0");
  detail::check(conv_window >= 2, "EmbedConfig: conv_window must be >= 2");
}

double watermark_loss(const Tensor& probs, const WatermarkMessage& w) {
  detail::check(probs.rank() == 1, "watermark_loss: probs must be rank 1");
  detail::check(probs.size() == w.length(), "watermark_loss: probs/message length mismatch");
  detail::check(w.length() > 0, "watermark_loss: empty message");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    const double p = clamp_prob(probs(i));
    sum -= w.bits[static_cast<size_t>(i)] == 1 ? std::log(p) : std::log(1.0 - p);
  }
  return sum / static_cast<double>(w.length());
}

double image_loss(const Tensor& a, const Tensor& b) {
  detail::check(a.same_shape(b), "image_loss: shape mismatch");
  return (a.vec() - b.vec()).squaredNorm() / static_cast<double>(a.size());
}

EmbedResult embed(const DecoderConfig& cfg, const DecoderWeights& w, const Tensor& host,
                  const WatermarkMessage& message, const EmbedConfig& ec,
                  std::uint64_t rng_seed) {
  cfg.validate();
  ec.validate();
  detail::check(host.rank() == 3 && host.dim(0) == 3, "embed: host must be 3xHxW");
  detail::check(host.vec().minCoeff() >= 0.0 && host.vec().maxCoeff() <= 1.0,
                "embed: host values must lie in [0,1]");
  detail::check(message.length() == cfg.message_bits, "embed: message length != message_bits");

  const ImageU8 host_img = tensor_to_image(host);

  EmbedResult best;
  int attempts = 0;
  for (int attempt = 0; attempt <= ec.max_retries; ++attempt) {
    Tensor x0 = host;
    if (attempt > 0) {
      RandomStream stream(rng_seed, static_cast<std::uint64_t>(attempt));
      for (Eigen::Index i = 0; i < x0.size(); ++i)
        x0(i) = std::clamp(x0(i) + ec.epsilon * stream.uniform(-1.0, 1.0), 0.0, 1.0);
    }

    Attempt at = run_attempt(cfg, w, host, host_img, x0, message, ec);
    ++attempts;

    const bool better = attempts == 1 || (at.ok && !best.success) ||
                        (at.ok == best.success && at.psnr_db > best.psnr_db);
    if (better) {
      best.watermarked = std::move(at.image);
      best.success = at.ok;
      best.iterations_used = at.iterations;
      best.final_Lw = at.lw;
      best.final_Li = at.li;
      best.final_Lall = at.lall;
      best.psnr_db = at.psnr_db;
      best.loss_trace = std::move(at.trace);
    }
    if (best.success) break;
  }
  best.retries = attempts - 1;
  return best;
}

WatermarkMessage extract(const DecoderConfig& cfg, const DecoderWeights& w,
                         const ImageU8& image) {
  detail::check(image.valid(), "extract: invalid image");
  WatermarkMessage m;
  m.bits = extract_message(cfg, w, image_to_tensor(image));
  return m;
}

}  // namespace asw
