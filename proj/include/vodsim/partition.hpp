#ifndef VODSIM_PARTITION_HPP
#define VODSIM_PARTITION_HPP

#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace vodsim {

/// Complete partitioning of a server's ports: the total capacity C is split
/// into k disjoint groups of c_j ports, each dedicated to one request class.
/// Partitions are indexed 1..k throughout the library.
class PartitionPlan {
 public:
  explicit PartitionPlan(std::vector<int> capacities)
      : capacities_(std::move(capacities)) {
    if (capacities_.empty())
      throw std::invalid_argument("PartitionPlan: needs at least one partition");
    for (std::size_t j = 0; j < capacities_.size(); ++j) {
      if (capacities_[j] < 1)
        throw std::invalid_argument("PartitionPlan: partition " +
                                    std::to_string(j + 1) +
                                    " must have at least one port");
    }
  }

  int partition_count() const { return static_cast<int>(capacities_.size()); }

  /// Ports of partition j, 1-based.
  int capacity(int j) const {
    check_index(j);
    return capacities_[static_cast<std::size_t>(j - 1)];
  }

  /// Total capacity C = sum of all c_j.
  int total_capacity() const {
    return std::accumulate(capacities_.begin(), capacities_.end(), 0);
  }

  const std::vector<int>& capacities() const { return capacities_; }

  bool operator==(const PartitionPlan& other) const = default;

 private:
  void check_index(int j) const {
    if (j < 1 || j > partition_count())
      throw std::out_of_range("PartitionPlan: partition index " +
                              std::to_string(j) + " not in 1.." +
                              std::to_string(partition_count()));
  }

  std::vector<int> capacities_;
};

/// Occupied-port counts Q_j, one per partition, bounded by the plan's
/// capacities. Q counts *occupied* ports; free ports are c_j - Q_j.
class OccupancyVector {
 public:
  explicit OccupancyVector(const PartitionPlan& plan)
      : capacities_(plan.capacities()),
        occupied_(capacities_.size(), 0),
        total_(0) {}

  int partition_count() const { return static_cast<int>(occupied_.size()); }

  int occupied(int j) const {
    check_index(j);
    return occupied_[static_cast<std::size_t>(j - 1)];
  }

  int free_ports(int j) const {
    check_index(j);
    const auto idx = static_cast<std::size_t>(j - 1);
    return capacities_[idx] - occupied_[idx];
  }

  bool is_full(int j) const { return free_ports(j) == 0; }

  int total_occupied() const { return total_; }

  void increment(int j) {
    check_index(j);
    const auto idx = static_cast<std::size_t>(j - 1);
    if (occupied_[idx] >= capacities_[idx])
      throw std::logic_error("OccupancyVector: increment past capacity on partition " +
                             std::to_string(j));
    ++occupied_[idx];
    ++total_;
  }

  void decrement(int j) {
    check_index(j);
    const auto idx = static_cast<std::size_t>(j - 1);
    if (occupied_[idx] <= 0)
      throw std::logic_error("OccupancyVector: decrement below zero on partition " +
                             std::to_string(j));
    --occupied_[idx];
    --total_;
  }

  bool operator==(const OccupancyVector& other) const = default;

 private:
  void check_index(int j) const {
    if (j < 1 || j > partition_count())
      throw std::out_of_range("OccupancyVector: partition index " +
                              std::to_string(j) + " out of range");
  }

  std::vector<int> capacities_;
  std::vector<int> occupied_;
  int total_;
};

}  // namespace vodsim

#endif  // VODSIM_PARTITION_HPP
