#include "trapline/schedule.hpp"

#include <cmath>

#include "trapline/error.hpp"

namespace trapline {

void WorkloadSpec::validate() const {
  auto count = [](double v, const char* name) {
    if (!std::isfinite(v) || v < 0) throw ValidationError(std::string(name) + " must be non-negative");
  };
  auto rate = [](double v, const char* name) {
    if (!std::isfinite(v) || v <= 0) throw ValidationError(std::string(name) + " must be positive");
  };
  count(burrows, "burrows");
  count(days, "days");
  count(overhead_images, "overhead_images");
  count(front_images, "front_images");
  count(compression_minutes, "compression_minutes");
  rate(segmentation_rate, "segmentation_rate");
  rate(copy_rate, "copy_rate");
}

WorkloadSpec WorkloadSpec::field_defaults() {
  return WorkloadSpec{.burrows = 12,
                      .days = 2,
                      .overhead_images = 20000,
                      .front_images = 20000,
                      .segmentation_rate = 10,
                      .copy_rate = 30,
                      .compression_minutes = 34};
}

ScheduleEstimate estimate_schedule(const WorkloadSpec& w, const StageWorkers& workers) {
  w.validate();
  if (workers.segmentation == 0 || workers.copy == 0 || workers.compression == 0) {
    throw ValidationError("worker counts must be positive");
  }
  ScheduleEstimate e;
  e.segmentation_hours = w.burrows * w.overhead_images / w.segmentation_rate / 3600.0 /
                         static_cast<double>(workers.segmentation);
  e.copy_hours = w.burrows * w.front_images / w.copy_rate / 3600.0 / static_cast<double>(workers.copy);
  e.compression_hours =
      w.burrows * w.days * w.compression_minutes / 60.0 / static_cast<double>(workers.compression);
  e.makespan_hours = e.segmentation_hours + e.copy_hours + e.compression_hours;
  e.pass = e.makespan_hours <= e.deadline_hours;
  return e;
}

}  // namespace trapline
