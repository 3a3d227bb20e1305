// Online learning protocol shared by every predictor in the library.
#pragma once

#include <string>

#include "metreg/value.hpp"

namespace metreg {

// Per round t the driver calls predict(x_t) first and then observe(y_t).
// Implementations may advance instance-dependent state inside predict and
// must not peek at y_t before it is observed.
class OnlineLearner {
 public:
  virtual ~OnlineLearner() = default;
  virtual std::string name() const = 0;
  virtual Value predict(const Value& x) = 0;
  virtual void observe(const Value& y) = 0;
};

}  // namespace metreg
