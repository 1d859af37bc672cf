#pragma once

namespace modnav::train {

// Numeric type used for training runs. Gradient checks always run in double;
// training itself is accurate enough in single precision and roughly twice
// as fast on these matrix sizes.
using train_real = float;

}  // namespace modnav::train
