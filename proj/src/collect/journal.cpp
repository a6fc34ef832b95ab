#include "wattbench/collect/journal.hpp"

#include <chrono>
#include <filesystem>

#include "wattbench/collect/trace_csv.hpp"
#include "wattbench/core/error.hpp"

namespace wattbench {

SampleJournal::SampleJournal(const std::string& path) : path_(path) {
  namespace fs = std::filesystem;
  std::error_code ec;
  const bool fresh = !fs::exists(path, ec) || fs::file_size(path, ec) == 0;
  out_.open(path, std::ios::binary | std::ios::app);
  if (!out_) throw DataError("cannot open journal '" + path + "'");
  if (fresh) {
    out_ << kTraceCsvHeader << "\n";
    out_.flush();
  }
}

void SampleJournal::append(const CollectorBatch& batch) {
  if (!out_.is_open()) throw DataError("journal '" + path_ + "' is closed");
  const auto text = render_trace_csv(batch.samples);
  // render includes the header line; strip it for appends.
  const auto body = text.find('\n') + 1;
  out_.write(text.data() + body, static_cast<std::streamsize>(text.size() - body));
  out_.flush();
  if (!out_) throw DataError("short write to journal '" + path_ + "'");
}

void SampleJournal::close() {
  if (out_.is_open()) out_.close();
}

std::vector<MeasurementSample> read_journal(const std::string& path) {
  return read_trace_csv(path);
}

void BatchQueue::push(CollectorBatch batch) {
  {
    std::lock_guard lock(mu_);
    items_.push_back(std::move(batch));
  }
  cv_.notify_one();
}

std::optional<CollectorBatch> BatchQueue::pop(double timeout_s) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, std::chrono::duration<double>(timeout_s),
               [&] { return !items_.empty() || closed_; });
  if (items_.empty()) return std::nullopt;
  auto batch = std::move(items_.front());
  items_.pop_front();
  return batch;
}

void BatchQueue::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool BatchQueue::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

}  // namespace wattbench
