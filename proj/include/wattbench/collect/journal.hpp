#pragma once

#include <condition_variable>
#include <deque>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "wattbench/collect/collectors.hpp"

namespace wattbench {

/// Durable per-run journal of everything the collectors delivered. Same CSV
/// schema as trace replay, so a journal can be replayed as a trace. Appends
/// flush to disk before returning: a crash can lose at most the batch being
/// written, never an acknowledged one.
class SampleJournal {
 public:
  /// Opens for append; writes the header only when the file is new/empty.
  explicit SampleJournal(const std::string& path);

  void append(const CollectorBatch& batch);
  void close();
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
};

std::vector<MeasurementSample> read_journal(const std::string& path);

/// Single-consumer queue carrying batches from concurrent collector pollers
/// to the journal writer.
class BatchQueue {
 public:
  void push(CollectorBatch batch);
  /// Blocks until a batch, close, or timeout. nullopt = closed and drained,
  /// or timed out; check closed() to tell the two apart.
  std::optional<CollectorBatch> pop(double timeout_s);
  void close();
  bool closed() const;

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<CollectorBatch> items_;
  bool closed_ = false;
};

}  // namespace wattbench
