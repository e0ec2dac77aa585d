#include "curvflux/sympoly.hpp"

namespace curvflux::sympoly {

template class Spectrum<double>;
template class Spectrum<Rational>;

}  // namespace curvflux::sympoly
