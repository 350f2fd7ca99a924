#pragma once

#include <chrono>
#include <cstddef>

namespace trapline {

/// One batch of field work: every burrow's cards for `days` days.
struct WorkloadSpec {
  double burrows = 0;
  double days = 0;
  double overhead_images = 0;  // per burrow per batch
  double front_images = 0;     // per burrow per batch
  double segmentation_rate = 1;  // images/s
  double copy_rate = 1;          // images/s
  double compression_minutes = 0;  // per burrow-day

  /// Counts are non-negative and rates positive; throws ValidationError.
  void validate() const;

  /// 12 burrows, 2 days, 20,000 images per card, 10/s segmentation,
  /// 30/s copy, 34 min compression per burrow-day.
  static WorkloadSpec field_defaults();
};

/// Parallelism per stage; each worker count divides its stage's time.
struct StageWorkers {
  std::size_t segmentation = 1;
  std::size_t copy = 1;
  std::size_t compression = 1;
};

inline constexpr double kDeadlineHours = 48.0;

struct ScheduleEstimate {
  double segmentation_hours = 0;
  double copy_hours = 0;
  double compression_hours = 0;
  double makespan_hours = 0;  // stages strictly sequential
  double deadline_hours = kDeadlineHours;
  bool pass = true;
};

ScheduleEstimate estimate_schedule(const WorkloadSpec& workload, const StageWorkers& workers = {});

}  // namespace trapline
