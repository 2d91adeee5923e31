#pragma once

#include "crowd/field.hpp"
#include "crowd/geometry.hpp"
#include "crowd/potential.hpp"
#include "crowd/interaction.hpp"
#include "crowd/transport.hpp"
#include "crowd/scenario.hpp"
#include "crowd/scenario_io.hpp"
#include "crowd/output.hpp"
#include "crowd/engine.hpp"
#include "crowd/presets.hpp"
