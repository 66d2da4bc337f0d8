// Copyright 2026 The aeroop Authors
// SPDX-License-Identifier: Apache-2.0

#include "aeroop/checkpoint.hpp"

#include <cmath>
#include <limits>

#include "aeroop/config.hpp"
#include "aeroop/error.hpp"
#include "binio.hpp"

namespace aeroop {
namespace {

constexpr char kMagic[] = "AOC1";
constexpr std::uint32_t kVersion = 1;

void write_block(binio::Writer& out, const std::string& name, const Tensor& t) {
  out.u32(static_cast<std::uint32_t>(name.size()));
  out.text(name);
  out.u8(static_cast<std::uint8_t>(t.dtype()));
  out.u32(static_cast<std::uint32_t>(t.rank()));
  for (std::size_t d : t.shape()) out.u64(d);
  if (t.is_complex()) {
    for (const cplx& z : t.cvalues()) {
      out.f64(z.real());
      out.f64(z.imag());
    }
  } else {
    for (double v : t.values()) out.f64(v);
  }
}

NamedTensor read_block(binio::Reader& in) {
  const std::uint32_t name_len = in.u32("block name length");
  NamedTensor block;
  block.name = in.text(name_len, "block name");
  const std::size_t dtype_at = in.offset();
  const std::uint8_t tag = in.u8("dtype tag");
  if (tag > 1) in.fail(dtype_at, "unknown dtype tag " + std::to_string(tag));
  const std::uint32_t rank = in.u32("rank");
  if (rank > 8) in.fail(dtype_at + 1, "implausible rank " + std::to_string(rank));
  Shape shape(rank);
  std::size_t numel = 1;
  for (auto& d : shape) {
    d = in.u64("extent");
    if (d != 0 && numel > std::numeric_limits<std::size_t>::max() / 16 / d) {
      in.fail(in.offset() - 8, "extent overflow in block " + block.name);
    }
    numel *= d;
  }
  const std::size_t width = tag == 1 ? 16 : 8;
  in.need(numel * width, "payload of " + block.name);
  if (tag == 1) {
    std::vector<cplx> v(numel);
    for (auto& z : v) {
      const double re = in.f64("payload");
      const double im = in.f64("payload");
      z = cplx(re, im);
    }
    block.value = Tensor::unchecked_complex(std::move(shape), std::move(v));
  } else {
    std::vector<double> v(numel);
    for (auto& x : v) x = in.f64("payload");
    block.value = Tensor::unchecked_real(std::move(shape), std::move(v));
  }
  if (!block.value.all_finite()) in.fail(dtype_at, "non-finite values in block " + block.name);
  return block;
}

Json loss_array(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(std::isfinite(x) ? Json(x) : Json(nullptr));
  return a;
}

std::vector<double> loss_vector(const Json& a, const char* what) {
  if (!a.is_array()) throw FormatError(std::string("checkpoint: ") + what + " is not an array");
  std::vector<double> v;
  for (const auto& x : a) v.push_back(x.is_null() ? std::nan("") : x.get<double>());
  return v;
}

[[noreturn]] void mismatch(const std::string& name, const Tensor& want, const Tensor& got) {
  throw ShapeError("checkpoint: block " + name + " has shape " + shape_str(got.shape()) + " " +
                   dtype_str(got.dtype()) + " but the stored config requires " +
                   shape_str(want.shape()) + " " + dtype_str(want.dtype()));
}

}  // namespace

std::vector<unsigned char> encode_checkpoint(const TrainingState& s) {
  Json header{{"label", run_label(s.model.config().flavor, s.train.n_rollout)},
              {"model", to_json(s.model.config())},
              {"grid", Json{{"h", s.model.grid_h()}, {"w", s.model.grid_w()}}},
              {"train", to_json(s.train)},
              {"normalizer", Json{{"vmin", s.normalizer.vmin}, {"vmax", s.normalizer.vmax}}},
              {"seeds", Json{{"model", s.model_seed}, {"data", s.data_seed}}},
              {"history", Json{{"train_loss", loss_array(s.history.train_loss)},
                               {"val_loss", loss_array(s.history.val_loss)}}}};
  const std::string text = header.dump();

  binio::Writer out;
  out.text(std::string_view(kMagic, 4));
  out.u32(kVersion);
  out.u64(text.size());
  out.text(text);
  const auto& params = s.model.parameters();
  out.u64(params.size());
  for (const auto& p : params) write_block(out, p.name, p.value);
  const bool has_moments = s.adam.m.size() == params.size();
  out.u64(has_moments ? 2 * params.size() : 0);
  if (has_moments) {
    for (std::size_t i = 0; i < params.size(); ++i) write_block(out, "m:" + params[i].name, s.adam.m[i]);
    for (std::size_t i = 0; i < params.size(); ++i) write_block(out, "v:" + params[i].name, s.adam.v[i]);
  }
  out.u64(s.adam.step);
  out.u64(s.epoch);
  return out.take();
}

TrainingState decode_checkpoint(const std::vector<unsigned char>& bytes) {
  binio::Reader in(bytes, "checkpoint");
  if (in.text(4, "magic") != std::string_view(kMagic, 4)) in.fail(0, "bad magic");
  const std::size_t version_at = in.offset();
  const std::uint32_t version = in.u32("version");
  if (version != kVersion) in.fail(version_at, "unsupported version " + std::to_string(version));
  const std::size_t json_at = in.offset();
  const std::uint64_t json_len = in.u64("header length");
  const std::string text = in.text(json_len, "header");

  Json header;
  ModelConfig model_cfg;
  TrainConfig train_cfg;
  std::size_t h = 0, w = 0;
  Normalizer norm;
  std::uint64_t model_seed = 0, data_seed = 0;
  LossRecord history;
  try {
    header = Json::parse(text);
    model_cfg = model_config_from_json(header.at("model"));
    train_cfg = train_config_from_json(header.at("train"));
    h = header.at("grid").at("h").get<std::size_t>();
    w = header.at("grid").at("w").get<std::size_t>();
    norm = Normalizer(header.at("normalizer").at("vmin").get<double>(),
                      header.at("normalizer").at("vmax").get<double>());
    model_seed = header.at("seeds").at("model").get<std::uint64_t>();
    data_seed = header.at("seeds").at("data").get<std::uint64_t>();
    history.train_loss = loss_vector(header.at("history").at("train_loss"), "train_loss");
    history.val_loss = loss_vector(header.at("history").at("val_loss"), "val_loss");
  } catch (const Json::exception& e) {
    in.fail(json_at + 8, std::string("malformed header: ") + e.what());
  } catch (const Error& e) {
    in.fail(json_at + 8, std::string("invalid header: ") + e.what());
  }

  TrainingState state{OperatorModel(model_cfg, h, w, model_seed), train_cfg, {}, 0, norm,
                      model_seed, data_seed, history};
  const std::uint64_t n_params = in.u64("parameter count");
  const auto& expected = state.model.parameters();
  if (n_params != expected.size()) {
    throw ShapeError("checkpoint: " + std::to_string(n_params) +
                     " parameter blocks but the stored config defines " +
                     std::to_string(expected.size()));
  }
  for (std::size_t i = 0; i < n_params; ++i) {
    NamedTensor block = read_block(in);
    const NamedTensor& want = expected[i];
    if (block.name != want.name) {
      throw ShapeError("checkpoint: expected parameter block " + want.name + ", found " + block.name);
    }
    if (block.value.shape() != want.value.shape() || block.value.dtype() != want.value.dtype()) {
      mismatch(block.name, want.value, block.value);
    }
    state.model.set_parameter(block.name, std::move(block.value));
  }
  const std::uint64_t n_moments = in.u64("moment count");
  if (n_moments != 0 && n_moments != 2 * n_params) {
    throw ShapeError("checkpoint: " + std::to_string(n_moments) + " moment blocks for " +
                     std::to_string(n_params) + " parameters");
  }
  for (std::size_t i = 0; i < n_moments; ++i) {
    NamedTensor block = read_block(in);
    const NamedTensor& want = expected[i % n_params];
    const std::string name = (i < n_params ? "m:" : "v:") + want.name;
    if (block.name != name) {
      throw ShapeError("checkpoint: expected moment block " + name + ", found " + block.name);
    }
    if (block.value.shape() != want.value.shape() || block.value.dtype() != want.value.dtype()) {
      mismatch(block.name, want.value, block.value);
    }
    (i < n_params ? state.adam.m : state.adam.v).push_back(std::move(block.value));
  }
  state.adam.step = in.u64("adam step");
  state.epoch = in.u64("epoch");
  if (in.remaining() != 0) in.fail(in.offset(), std::to_string(in.remaining()) + " trailing bytes");
  if (state.history.train_loss.size() != state.epoch) {
    throw FormatError("checkpoint: loss history holds " +
                      std::to_string(state.history.train_loss.size()) + " epochs, counter says " +
                      std::to_string(state.epoch));
  }
  return state;
}

void save_checkpoint(const TrainingState& state, const std::string& path) {
  binio::write_file(path, encode_checkpoint(state));
}

TrainingState load_checkpoint(const std::string& path) {
  return decode_checkpoint(binio::read_file(path));
}

}  // namespace aeroop
