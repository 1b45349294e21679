#pragma once

// TRDF: the binary container carrying per-item, per-layer hidden states.
//
// Layout (all integers and floats little-endian):
//
//   "TRDF"                      4 bytes magic
//   version                     u32 = 1
//   header_length               u64
//   header                      UTF-8 JSON, header_length bytes
//   record * num_items:
//     num_tokens                u32
//     num_words                 u32
//     word_ids                  num_tokens x i32  (-1 marks special tokens)
//     labels                    num_words x i32 (token task) or 1 x i32
//     tensor                    num_layers x num_tokens x hidden_dim f32,
//                               layer-major, then token, then dimension
//
// Layer 0 is the embedding-layer output.

#include "transrank/common.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace transrank {

inline constexpr char kDumpMagic[4] = {'T', 'R', 'D', 'F'};
inline constexpr std::uint32_t kDumpVersion = 1;

struct DumpHeader {
  std::string model_name;
  TaskType task_type = TaskType::sequence;
  std::uint64_t num_items = 0;
  std::uint32_t num_layers = 0;
  std::uint32_t hidden_dim = 0;
  std::vector<std::string> label_names;
  std::string dtype = "f32";

  void validate() const;
  std::string to_json() const;
  static DumpHeader from_json(std::string_view text);

  bool operator==(const DumpHeader&) const = default;
};

struct HiddenStateRecord {
  // Shape fields copied from the header; not serialized per record.
  std::uint32_t num_layers = 0;
  std::uint32_t hidden_dim = 0;

  std::uint32_t num_tokens = 0;
  std::uint32_t num_words = 0;
  std::vector<std::int32_t> word_ids;
  std::vector<std::int32_t> labels;
  std::vector<float> tensor;

  using LayerView =
      Eigen::Map<const RowMatrix<float>, Eigen::Unaligned>;

  /// num_tokens x hidden_dim view of one layer.
  LayerView layer(std::uint32_t index) const;

  /// Number of label entries the record carries for the given task.
  static std::uint64_t label_count(TaskType task, std::uint32_t num_words) {
    return task == TaskType::token ? num_words : 1;
  }

  /// Throws ValidationError naming `index` on any invariant violation.
  void validate(const DumpHeader& header, std::uint64_t index) const;

  bool operator==(const HiddenStateRecord&) const = default;
};

/// Streaming TRDF writer. The preamble is written on construction.
class DumpWriter {
 public:
  DumpWriter(std::ostream& sink, DumpHeader header);

  void write(const HiddenStateRecord& record);
  /// Checks the record count against the header; returns total bytes.
  std::uint64_t finish();

  std::uint64_t bytes_written() const { return bytes_; }
  const DumpHeader& header() const { return header_; }

 private:
  void put(const void* data, std::size_t size);

  std::ostream* sink_;
  DumpHeader header_;
  std::uint64_t written_ = 0;
  std::uint64_t bytes_ = 0;
};

std::uint64_t write_dump(const DumpHeader& header,
                         std::span<const HiddenStateRecord> records,
                         std::ostream& sink);

/// Single-pass TRDF reader. Records are decoded and validated one at a time.
class DumpReader {
 public:
  explicit DumpReader(std::istream& source);
  explicit DumpReader(std::unique_ptr<std::istream> source);

  /// Opens a file; throws IoError if it cannot be read.
  static DumpReader open(const std::filesystem::path& path);

  const DumpHeader& header() const { return header_; }

  /// Next record, or nullopt once num_items records were consumed.
  std::optional<HiddenStateRecord> next();
  /// Advances past the next record without decoding its payload.
  /// Returns false once all records were consumed.
  bool skip();

  /// Records consumed so far (decoded or skipped).
  std::uint64_t position() const { return position_; }

 private:
  void read_preamble();
  [[noreturn]] void truncated(const char* field, std::uint64_t expected,
                              std::uint64_t available) const;
  void read_exact(void* data, std::size_t size, const char* what);
  /// num_tokens and num_words of the next record.
  std::pair<std::uint32_t, std::uint32_t> read_counts();
  void advance(std::uint64_t size, const char* what);
  void check_trailing();

  std::unique_ptr<std::istream> owned_;
  std::istream* in_;
  DumpHeader header_;
  std::uint64_t position_ = 0;
  std::uint64_t offset_ = 0;
  std::optional<std::uint64_t> total_size_;
  bool in_records_ = false;
};

/// Reads an entire dump into memory; convenient for tests and small files.
std::pair<DumpHeader, std::vector<HiddenStateRecord>> read_dump(
    std::istream& source);

/// "<sanitized-model-name>.trdf"
std::string dump_file_name(std::string_view model_name);

}  // namespace transrank
