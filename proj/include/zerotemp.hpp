#ifndef ZEROTEMP_HPP
#define ZEROTEMP_HPP

#include "zerotemp/error.hpp"
#include "zerotemp/region.hpp"
#include "zerotemp/geometry.hpp"
#include "zerotemp/random.hpp"
#include "zerotemp/dynamics.hpp"
#include "zerotemp/rejection_free.hpp"
#include "zerotemp/coupling.hpp"
#include "zerotemp/statistics.hpp"
#include "zerotemp/experiments.hpp"

#endif  // ZEROTEMP_HPP
