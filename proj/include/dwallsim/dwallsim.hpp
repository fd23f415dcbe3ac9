#ifndef DWALLSIM_DWALLSIM_HPP
#define DWALLSIM_DWALLSIM_HPP

#include "dwallsim/applied_field.hpp"
#include "dwallsim/calculus.hpp"
#include "dwallsim/cutoff.hpp"
#include "dwallsim/energy.hpp"
#include "dwallsim/error.hpp"
#include "dwallsim/field.hpp"
#include "dwallsim/gauge.hpp"
#include "dwallsim/harness.hpp"
#include "dwallsim/integrator.hpp"
#include "dwallsim/io.hpp"
#include "dwallsim/linalg4.hpp"
#include "dwallsim/modulation.hpp"
#include "dwallsim/parallel.hpp"
#include "dwallsim/params.hpp"
#include "dwallsim/spectral.hpp"
#include "dwallsim/trajectory.hpp"
#include "dwallsim/two_wall.hpp"
#include "dwallsim/vec3.hpp"
#include "dwallsim/wall.hpp"

#endif  // DWALLSIM_DWALLSIM_HPP
