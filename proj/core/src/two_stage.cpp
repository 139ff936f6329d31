#include "tgp/two_stage.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tgp/error.hpp"

namespace tgp {

Vector NoiseModel::log_variance(const Points& x) const {
  const Prediction p = std::visit(
      [&](const auto& gp) -> Prediction {
        using T = std::decay_t<decltype(gp)>;
        if constexpr (std::is_same_v<T, ExactGp>) {
          return gp.predict(x);
        } else {
          return predictive_qf(gp, x);
        }
      },
      gp_);
  return p.mean.cwiseMax(-kLogVarianceClamp).cwiseMin(kLogVarianceClamp);
}

Vector NoiseModel::variance(const Points& x) const {
  return log_variance(x).array().exp().matrix();
}

double NoiseModel::log_target_noise() const {
  if (const auto* exact = std::get_if<ExactGp>(&gp_)) {
    return std::get<HomoscedasticNoise>(exact->hyperparameters().noise).log_variance;
  }
  return *std::get<SvgpState>(gp_).log_noise;
}

void NoiseModel::write(BinaryWriter& out) const {
  BinaryWriter body;
  if (const auto* exact = std::get_if<ExactGp>(&gp_)) {
    exact->write(body);
    out.section("EXGP", body);
  } else {
    std::get<SvgpState>(gp_).write(body);
    out.section("SVGP", body);
  }
}

NoiseModel NoiseModel::read(BinaryReader& in) {
  if (in.peek_tag() == "EXGP") {
    BinaryReader body = in.section("EXGP");
    NoiseModel m(ExactGp::read(body));
    body.expect_end("noise model");
    return m;
  }
  BinaryReader body = in.section("SVGP");
  NoiseModel m(SvgpState::read(body));
  body.expect_end("noise model");
  return m;
}

NoiseModel fit_noise_gp(const Points& x, const Vector& r,
                        const NoiseFitOptions& options, std::uint64_t seed,
                        const EpochCallback& on_epoch) {
  if (x.rows() != r.size()) {
    fail(ErrorKind::kInvalidInput, "noise GP: input/variance length mismatch");
  }
  if (r.size() == 0) fail(ErrorKind::kEmptyDataset, "noise GP needs samples");
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    if (!(r(i) > 0.0) || !std::isfinite(r(i))) {
      fail(ErrorKind::kInvalidInput,
           "noise variance sample at index " + std::to_string(i) +
               " must be positive and finite");
    }
  }
  Dataset d;
  d.x = x;
  d.y = r.array().log().matrix();
  const double mean_log = d.y.mean();
  const KernelConfig kernel =
      KernelConfig::make(KernelFamily::kRbf, std::numbers::ln2, std::numbers::ln2);

  if (static_cast<std::size_t>(r.size()) <= options.exact_limit) {
    ExactHyperparameters hp;
    hp.kernel = kernel;
    hp.mean = ConstantMean{mean_log};
    hp.noise = HomoscedasticNoise{std::log(std::numbers::ln2), true};
    return NoiseModel(fit_exact(d, hp, options.adam, on_epoch));
  }
  SvgpFitOptions so;
  so.adam = options.adam;
  so.adam.batch_size = options.batch_size;
  so.num_inducing = std::min<std::size_t>(options.num_inducing, static_cast<std::size_t>(r.size()));
  so.kernel = kernel;
  so.mean = ConstantMean{mean_log};
  so.init_log_noise = std::log(std::numbers::ln2);
  return NoiseModel(fit_svgp(d, so, seed, nullptr, on_epoch));
}

void TwoStageModel::write(BinaryWriter& out) const {
  out.u8(static_cast<std::uint8_t>(variant));
  stats.write(out);
  out.vec(training_noise);
  BinaryWriter noise_body;
  noise.write(noise_body);
  out.section("NOIS", noise_body);
  BinaryWriter terrain_body;
  if (const auto* exact = std::get_if<ExactGp>(&terrain)) {
    exact->write(terrain_body);
    out.section("EXGP", terrain_body);
  } else {
    std::get<SvgpState>(terrain).write(terrain_body);
    out.section("SVGP", terrain_body);
  }
}

TwoStageModel TwoStageModel::read(BinaryReader& in) {
  const std::uint8_t variant = in.u8();
  if (variant > 1) fail(ErrorKind::kParse, "invalid two-stage variant");
  const NormStats stats = NormStats::read(in);
  Vector training_noise = in.vec();
  BinaryReader noise_body = in.section("NOIS");
  NoiseModel noise = NoiseModel::read(noise_body);
  noise_body.expect_end("noise section");
  std::variant<ExactGp, SvgpState> terrain = [&]() -> std::variant<ExactGp, SvgpState> {
    if (in.peek_tag() == "EXGP") {
      BinaryReader body = in.section("EXGP");
      return ExactGp::read(body);
    }
    BinaryReader body = in.section("SVGP");
    return SvgpState::read(body);
  }();
  return TwoStageModel{std::move(noise), std::move(terrain),
                       static_cast<TwoStageVariant>(variant), stats,
                       std::move(training_noise)};
}

TwoStageModel fit_terrain(const Dataset& data, NoiseModel noise,
                          TwoStageVariant variant,
                          const TerrainFitOptions& options, std::uint64_t seed,
                          const EpochCallback& on_epoch) {
  if (data.size() == 0) fail(ErrorKind::kEmptyDataset, "terrain GP needs samples");
  Vector v = noise.variance(data.x);
  if (variant == TwoStageVariant::kExact) {
    ExactHyperparameters hp;
    hp.kernel = options.kernel;
    hp.mean = options.mean;
    hp.noise = FixedNoise{v};
    ExactGp terrain = fit_exact(data, hp, options.adam, on_epoch);
    return TwoStageModel{std::move(noise), std::move(terrain), variant,
                         data.stats, std::move(v)};
  }
  SvgpFitOptions so;
  so.adam = options.adam;
  so.num_inducing = options.num_inducing;
  so.kernel = options.kernel;
  so.mean = options.mean;
  SvgpState terrain = fit_svgp(data, so, seed, &v, on_epoch);
  return TwoStageModel{std::move(noise), std::move(terrain), variant, data.stats,
                       std::move(v)};
}

TerrainPrediction predict_terrain(const TwoStageModel& model,
                                  const Points& world_points) {
  const Points xn = model.stats.normalize_points(world_points);
  const Prediction p = std::visit(
      [&](const auto& gp) -> Prediction {
        using T = std::decay_t<decltype(gp)>;
        if constexpr (std::is_same_v<T, ExactGp>) {
          return gp.predict(xn);
        } else {
          return predictive_qf(gp, xn);
        }
      },
      model.terrain);
  const Vector noise = model.noise.variance(xn);
  TerrainPrediction out;
  out.mean = model.stats.denormalize_targets(p.mean);
  out.latent_var = model.stats.denormalize_variances(p.latent_var);
  out.predictive_var = model.stats.denormalize_variances(p.latent_var + noise);
  return out;
}

}  // namespace tgp
