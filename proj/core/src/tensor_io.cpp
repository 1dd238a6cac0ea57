// Copyright (C) 2026 The posefuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "posefuse/tensor_io.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <iterator>
#include <limits>

#include "posefuse/error.hpp"
#include "posefuse/json_io.hpp"

namespace posefuse {

namespace {

constexpr std::uint8_t kMagic[4] = {'P', 'T', 'N', 'S'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint32_t u32(const char* what) {
    if (remaining() < 4) {
      fail(ErrorCode::kTruncatedPayload, std::string("tensor header truncated reading ") + what);
    }
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::size_t pos() const { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_tensor(const Tensor& tensor) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + 4 * tensor.ndim() + 4 * tensor.size());
  for (std::uint8_t b : kMagic) out.push_back(b);
  put_u32(out, kTensorFormatVersion);
  put_u32(out, kTensorDtypeF32);
  put_u32(out, static_cast<std::uint32_t>(tensor.ndim()));
  for (std::size_t d : tensor.dims()) {
    if (d > std::numeric_limits<std::uint32_t>::max()) {
      fail(ErrorCode::kDimOverflow, "tensor dim does not fit in u32");
    }
    put_u32(out, static_cast<std::uint32_t>(d));
  }
  for (float f : tensor.data()) put_u32(out, std::bit_cast<std::uint32_t>(f));
  return out;
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    fail(ErrorCode::kBadMagic, "tensor magic is not \"PTNS\"");
  }
  Reader r(bytes.subspan(4));
  if (const auto version = r.u32("version"); version != kTensorFormatVersion) {
    fail(ErrorCode::kBadVersion, "unsupported tensor version " + std::to_string(version));
  }
  if (const auto dtype = r.u32("dtype"); dtype != kTensorDtypeF32) {
    fail(ErrorCode::kBadDtype, "unsupported tensor dtype " + std::to_string(dtype));
  }
  const std::uint32_t ndim = r.u32("ndim");
  if (ndim > Tensor::kMaxDims) {
    fail(ErrorCode::kDimOverflow, "tensor rank " + std::to_string(ndim) + " exceeds 4");
  }
  std::vector<std::size_t> dims(ndim);
  std::uint64_t count = 1;
  for (auto& d : dims) {
    d = r.u32("dims");
    // Each dim is < 2^32, so the product only overflows past four of them;
    // cap at what a 64-bit payload byte count can describe.
    if (d != 0 && count > (std::numeric_limits<std::uint64_t>::max() / 4) / d) {
      fail(ErrorCode::kDimOverflow, "tensor element count overflows");
    }
    count *= d;
  }
  if (r.remaining() / 4 < count) {
    fail(ErrorCode::kTruncatedPayload,
         "tensor payload truncated: need " + std::to_string(count) + " floats, have " +
             std::to_string(r.remaining() / 4));
  }
  if (r.remaining() != count * 4) {
    fail(ErrorCode::kTrailingBytes, "tensor file has bytes past the payload");
  }
  std::vector<float> data(static_cast<std::size_t>(count));
  for (auto& f : data) f = std::bit_cast<float>(r.u32("payload"));
  return Tensor(std::move(dims), std::move(data));
}

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open tensor file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_tensor(bytes);
  } catch (const Error& e) {
    fail(e.code(), path.string() + ": " + e.what());
  }
}

void write_tensor(const std::filesystem::path& path, const Tensor& tensor) {
  const auto bytes = encode_tensor(tensor);
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

}  // namespace posefuse
