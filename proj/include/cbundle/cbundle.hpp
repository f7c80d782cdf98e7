#pragma once

#include "cbundle/error.hpp"
#include "cbundle/expr.hpp"
#include "cbundle/manifold.hpp"
#include "cbundle/forms.hpp"
#include "cbundle/invariant.hpp"
#include "cbundle/splitting.hpp"
#include "cbundle/profiles.hpp"
#include "cbundle/constructor.hpp"
#include "cbundle/bourgeois.hpp"
#include "cbundle/models.hpp"
#include "cbundle/dsl.hpp"
#include "cbundle/report.hpp"
#include "cbundle/recipes.hpp"
#include "cbundle/gallery.hpp"
#include "cbundle/scenario.hpp"
