#include "tgp/model_io.hpp"

#include <fstream>
#include <sstream>

#include "tgp/error.hpp"

namespace tgp {

std::string serialize_model(const TerrainModel& model) {
  BinaryWriter out;
  out.raw(kModelMagic);
  out.u8(kModelVersion);

  BinaryWriter meth;
  model.config.write(meth);
  out.section("METH", meth);

  BinaryWriter norm;
  model.stats.write(norm);
  out.section("NORM", norm);

  BinaryWriter body;
  if (const auto* exact = std::get_if<ExactGp>(&model.body)) {
    exact->write(body);
    out.section("EXGP", body);
  } else if (const auto* svgp = std::get_if<SvgpState>(&model.body)) {
    svgp->write(body);
    out.section("SVGP", body);
  } else {
    std::get<TwoStageModel>(model.body).write(body);
    out.section("TWOS", body);
  }
  return out.bytes();
}

TerrainModel deserialize_model(std::string_view bytes) {
  BinaryReader in(bytes);
  if (bytes.size() < kModelMagic.size() || in.raw(kModelMagic.size()) != kModelMagic) {
    fail(ErrorKind::kParse, "not a model file (bad magic)");
  }
  const std::uint8_t version = in.u8();
  if (version != kModelVersion) {
    fail(ErrorKind::kParse, "unsupported model file version " + std::to_string(version));
  }
  BinaryReader meth = in.section("METH");
  MethodConfig config = MethodConfig::read(meth);
  meth.expect_end("METH section");
  BinaryReader norm = in.section("NORM");
  const NormStats stats = NormStats::read(norm);
  norm.expect_end("NORM section");

  const std::string tag = in.peek_tag();
  BinaryReader body = in.section(tag.empty() ? "BODY" : tag);
  TerrainModel model = [&]() -> TerrainModel {
    if (tag == "EXGP") return TerrainModel{config, stats, ExactGp::read(body)};
    if (tag == "SVGP") return TerrainModel{config, stats, SvgpState::read(body)};
    if (tag == "TWOS") return TerrainModel{config, stats, TwoStageModel::read(body)};
    fail(ErrorKind::kParse, "unknown model body section '" + tag + "'");
  }();
  body.expect_end("model body");
  in.expect_end("model file");
  return model;
}

void save_model(const TerrainModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  const std::string bytes = serialize_model(model);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::kIo, "write failed for " + path.string());
}

TerrainModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_model(ss.str());
}

}  // namespace tgp
