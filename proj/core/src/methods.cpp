#include "tgp/methods.hpp"

#include <cmath>

#include "tgp/error.hpp"

namespace tgp {

KernelConfig initial_kernel(const MethodConfig& cfg) {
  return KernelConfig::make(cfg.kernel, kInitialHyperparameter,
                            kInitialHyperparameter, kInitialHyperparameter,
                            cfg.nu);
}

namespace {

TerrainPrediction finish_homoscedastic(const NormStats& stats,
                                       const Prediction& p, double noise) {
  TerrainPrediction out;
  out.mean = stats.denormalize_targets(p.mean);
  out.latent_var = stats.denormalize_variances(p.latent_var);
  out.predictive_var =
      stats.denormalize_variances((p.latent_var.array() + noise).matrix());
  return out;
}

}  // namespace

const char* to_string(MethodId id) {
  switch (id) {
    case MethodId::kTomita: return "tomita";
    case MethodId::kHayner: return "hayner";
    case MethodId::kTorroba: return "torroba";
    case MethodId::kOursExact: return "ours-exact";
    case MethodId::kOursVariational: return "ours-variational";
  }
  return "unknown";
}

MethodId parse_method(const std::string& name) {
  for (const MethodId id : {MethodId::kTomita, MethodId::kHayner, MethodId::kTorroba,
                            MethodId::kOursExact, MethodId::kOursVariational}) {
    if (name == to_string(id)) return id;
  }
  fail(ErrorKind::kInvalidConfig,
       "unknown method '" + name +
           "' (expected tomita, hayner, torroba, ours-exact, ours-variational)");
}

MethodConfig MethodConfig::defaults(MethodId id) {
  MethodConfig cfg;
  cfg.id = id;
  switch (id) {
    case MethodId::kTomita:
      cfg.kernel = KernelFamily::kAbsoluteExponential;
      cfg.adam.learning_rate = 0.1;
      cfg.adam.max_epochs = 40;
      break;
    case MethodId::kHayner:
      cfg.kernel = KernelFamily::kRbf;
      cfg.adam.learning_rate = 0.1;
      cfg.adam.max_epochs = 50;
      break;
    case MethodId::kOursExact:
      cfg.kernel = KernelFamily::kRationalQuadratic;
      cfg.adam.learning_rate = 0.1;
      cfg.adam.max_epochs = 30;
      break;
    case MethodId::kTorroba:
      cfg.kernel = KernelFamily::kMatern;
      cfg.nu = MaternNu::kFiveHalves;
      cfg.adam.learning_rate = 0.1;
      cfg.adam.max_epochs = 75;
      cfg.adam.batch_size = 256;
      cfg.num_inducing = 1024;
      break;
    case MethodId::kOursVariational:
      cfg.kernel = KernelFamily::kRationalQuadratic;
      cfg.adam.learning_rate = 0.05;
      cfg.adam.max_epochs = 40;
      cfg.adam.batch_size = 256;
      cfg.num_inducing = 1024;
      break;
  }
  return cfg;
}

bool MethodConfig::heteroscedastic() const {
  return id == MethodId::kOursExact || id == MethodId::kOursVariational;
}

bool MethodConfig::variational() const {
  return id == MethodId::kTorroba || id == MethodId::kOursVariational;
}

void MethodConfig::write(BinaryWriter& out) const {
  out.u8(static_cast<std::uint8_t>(id));
  out.u8(static_cast<std::uint8_t>(kernel));
  out.u8(static_cast<std::uint8_t>(nu));
  out.f64(adam.learning_rate);
  out.f64(adam.beta1);
  out.f64(adam.beta2);
  out.f64(adam.epsilon);
  out.u64(adam.max_epochs);
  out.u64(adam.batch_size);
  out.u64(num_inducing);
  out.u64(seed);
  out.f64(noise_fit.adam.learning_rate);
  out.u64(noise_fit.adam.max_epochs);
  out.u64(noise_fit.exact_limit);
  out.u64(noise_fit.num_inducing);
  out.u64(noise_fit.batch_size);
}

MethodConfig MethodConfig::read(BinaryReader& in) {
  MethodConfig cfg;
  const std::uint8_t id = in.u8();
  const std::uint8_t kernel = in.u8();
  const std::uint8_t nu = in.u8();
  if (id > 4 || kernel > 3 || nu > 2) fail(ErrorKind::kParse, "invalid method header");
  cfg.id = static_cast<MethodId>(id);
  cfg.kernel = static_cast<KernelFamily>(kernel);
  cfg.nu = static_cast<MaternNu>(nu);
  cfg.adam.learning_rate = in.f64();
  cfg.adam.beta1 = in.f64();
  cfg.adam.beta2 = in.f64();
  cfg.adam.epsilon = in.f64();
  cfg.adam.max_epochs = in.u64();
  cfg.adam.batch_size = in.u64();
  cfg.num_inducing = in.u64();
  cfg.seed = in.u64();
  cfg.noise_fit.adam.learning_rate = in.f64();
  cfg.noise_fit.adam.max_epochs = in.u64();
  cfg.noise_fit.exact_limit = in.u64();
  cfg.noise_fit.num_inducing = in.u64();
  cfg.noise_fit.batch_size = in.u64();
  return cfg;
}

TerrainPrediction TerrainModel::predict(const Points& world_points) const {
  if (const auto* two = std::get_if<TwoStageModel>(&body)) {
    return predict_terrain(*two, world_points);
  }
  const Points xn = stats.normalize_points(world_points);
  if (const auto* exact = std::get_if<ExactGp>(&body)) {
    const auto& h = std::get<HomoscedasticNoise>(exact->hyperparameters().noise);
    return finish_homoscedastic(stats, exact->predict(xn), std::exp(h.log_variance));
  }
  const auto& st = std::get<SvgpState>(body);
  return finish_homoscedastic(stats, predictive_qf(st, xn), std::exp(*st.log_noise));
}

TerrainModel fit_method(const MethodConfig& config, const Dataset& data,
                        const DemGrid* prior, const EpochCallback& on_epoch) {
  const KernelConfig kernel = initial_kernel(config);
  const double log_noise0 = std::log(kInitialHyperparameter);

  if (!config.heteroscedastic()) {
    if (!config.variational()) {
      ExactHyperparameters hp;
      hp.kernel = kernel;
      hp.mean = ConstantMean{0.0};
      hp.noise = HomoscedasticNoise{log_noise0, true};
      return TerrainModel{config, data.stats, fit_exact(data, hp, config.adam, on_epoch)};
    }
    SvgpFitOptions so;
    so.adam = config.adam;
    so.num_inducing = config.num_inducing;
    so.kernel = kernel;
    so.mean = ConstantMean{0.0};
    so.init_log_noise = log_noise0;
    return TerrainModel{config, data.stats,
                        fit_svgp(data, so, config.seed, nullptr, on_epoch)};
  }

  if (!data.r) {
    fail(ErrorKind::kInvalidConfig,
         std::string(to_string(config.id)) + " needs a noise-variance grid");
  }
  if (!prior) {
    fail(ErrorKind::kInvalidConfig,
         std::string(to_string(config.id)) + " needs a low-resolution prior grid");
  }
  return fit_two_stage(config, data, *prior,
                       fit_noise_gp(data.x, *data.r, config.noise_fit, config.seed),
                       on_epoch);
}

TerrainModel fit_two_stage(const MethodConfig& config, const Dataset& data,
                           const DemGrid& prior, NoiseModel noise,
                           const EpochCallback& on_epoch) {
  if (!config.heteroscedastic()) {
    fail(ErrorKind::kInvalidConfig,
         std::string(to_string(config.id)) + " is not a two-stage method");
  }
  TerrainFitOptions to;
  to.adam = config.adam;
  to.kernel = initial_kernel(config);
  to.mean = bilinear_prior(prior, data.stats);
  to.num_inducing = config.num_inducing;
  const TwoStageVariant variant = config.variational() ? TwoStageVariant::kVariational
                                                       : TwoStageVariant::kExact;
  return TerrainModel{config, data.stats,
                      fit_terrain(data, std::move(noise), variant, to, config.seed,
                                  on_epoch)};
}

}  // namespace tgp
