#include "sphereflow/poly.hpp"

namespace sphereflow {

template class Poly<QuadSurd, 3>;
template class Poly<QuadSurd, 2>;
template class Poly<double, 3>;
template class Poly<double, 2>;

}  // namespace sphereflow
