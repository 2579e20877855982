#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "coprompt/checkpoint.hpp"
#include "coprompt/error.hpp"

using namespace coprompt;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path dir =
      fs::temp_directory_path() / ("coprompt_ckpt_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("checkpoints round-trip bit for bit and re-save byte-stable") {
  const fs::path dir = temp_dir();
  std::vector<ParamTensor> tensors;
  ParamTensor a = ParamTensor::zeros("weights", {2, 3});
  a.data = {M_PI, 1.0 / 3.0, -0.0, 5e-324, -1e308, 42.0};
  ParamTensor b = scalar_tensor("meta.iteration", 17.0);
  tensors.push_back(a);
  tensors.push_back(b);

  const fs::path first = dir / "a.bin";
  const fs::path second = dir / "b.bin";
  save_tensors(first, tensors);
  const std::vector<ParamTensor> loaded = load_tensors(first);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].name == "weights");
  CHECK(loaded[0].shape == std::vector<int64_t>{2, 3});
  for (size_t j = 0; j < a.data.size(); ++j) {
    CHECK(std::memcmp(&loaded[0].data[j], &a.data[j], sizeof(double)) == 0);
  }
  save_tensors(second, loaded);
  CHECK(file_bytes(first) == file_bytes(second));

  const TensorArchive archive(loaded);
  CHECK(archive.scalar("meta.iteration") == 17.0);
  CHECK(archive.contains("weights"));
  CHECK_FALSE(archive.contains("nope"));
  CHECK_THROWS_AS(archive.get("nope"), Error);
  fs::remove_all(dir);
}

TEST_CASE("corrupt checkpoints are rejected") {
  const fs::path dir = temp_dir();
  const fs::path path = dir / "bad.bin";
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOTMAGIC rest";
  }
  CHECK_THROWS_AS(load_tensors(path), Error);

  std::vector<ParamTensor> tensors{scalar_tensor("x", 1.0)};
  save_tensors(path, tensors);
  // Truncate mid-payload.
  fs::resize_file(path, fs::file_size(path) - 4);
  CHECK_THROWS_AS(load_tensors(path), Error);
  CHECK_THROWS_AS(load_tensors(dir / "missing.bin"), Error);
  fs::remove_all(dir);
}
