#pragma once

// Shared helpers for building dumps and running the command line in tests.

#include "transrank/dump_format.hpp"
#include "transrank/random.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

namespace support {

struct Dump {
  transrank::DumpHeader header;
  std::vector<transrank::HiddenStateRecord> records;
};

/// A random valid dump: varied shapes, subword counts and special tokens.
inline Dump random_dump(transrank::SplitMix64& rng) {
  using namespace transrank;
  Dump dump;
  DumpHeader& h = dump.header;
  h.model_name = "model-" + std::to_string(rng.below(1000));
  h.task_type = rng.below(2) == 0 ? TaskType::token : TaskType::sequence;
  h.num_items = 1 + rng.below(6);
  h.num_layers = static_cast<std::uint32_t>(2 + rng.below(4));
  h.hidden_dim = static_cast<std::uint32_t>(1 + rng.below(6));
  const auto classes = 1 + rng.below(4);
  for (std::uint64_t c = 0; c < classes; ++c) h.label_names.push_back("L" + std::to_string(c));

  for (std::uint64_t item = 0; item < h.num_items; ++item) {
    HiddenStateRecord r;
    r.num_layers = h.num_layers;
    r.hidden_dim = h.hidden_dim;
    r.num_words = static_cast<std::uint32_t>(1 + rng.below(5));
    if (rng.below(2) == 0) r.word_ids.push_back(-1);
    for (std::uint32_t w = 0; w < r.num_words; ++w) {
      const auto pieces = 1 + rng.below(3);
      for (std::uint64_t p = 0; p < pieces; ++p) r.word_ids.push_back(static_cast<int>(w));
    }
    if (rng.below(3) == 0) r.word_ids.push_back(-1);
    r.num_tokens = static_cast<std::uint32_t>(r.word_ids.size());
    const auto label_count = HiddenStateRecord::label_count(h.task_type, r.num_words);
    for (std::uint64_t l = 0; l < label_count; ++l) {
      r.labels.push_back(static_cast<int>(rng.below(classes)));
    }
    r.tensor.resize(static_cast<std::size_t>(r.num_layers) * r.num_tokens * r.hidden_dim);
    for (auto& v : r.tensor) v = static_cast<float>(rng.normal());
    dump.records.push_back(std::move(r));
  }
  return dump;
}

inline std::string serialize(const Dump& dump) {
  std::ostringstream out(std::ios::binary);
  transrank::write_dump(dump.header, dump.records, out);
  return out.str();
}

/// A scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("transrank-" + tag + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out << bytes;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct ProcessResult {
  int exit_code = -1;
  std::string out;
};

/// Runs a shell command and captures its stdout.
inline ProcessResult run_process(const std::string& command) {
  ProcessResult result;
  FILE* pipe = ::popen(command.c_str(), "r");
  if (pipe == nullptr) return result;
  char buf[4096];
  std::size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) result.out.append(buf, got);
  const int status = ::pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

}  // namespace support
