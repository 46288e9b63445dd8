#include "molmem/units.hpp"

#include <cmath>

namespace molmem::units {

double intensity_to_field(double intensity_w_cm2) {
    return std::sqrt(intensity_w_cm2 / intensity_au_w_cm2);
}

}  // namespace molmem::units
