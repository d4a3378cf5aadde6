#pragma once

// Raw coefficient tables for the diagonal-norm operator families (h = 1).

namespace shapeopt::coeffs {

// Order 6, boundary elements M^(0..5) of the variable-coefficient D2, each 9x9 on points 0..8.
extern const double kD2Order6Boundary[6][9][9];

}  // namespace shapeopt::coeffs
