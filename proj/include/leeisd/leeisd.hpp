#pragma once

#include <leeisd/cmsd.hpp>
#include <leeisd/errors.hpp>
#include <leeisd/estimator.hpp>
#include <leeisd/field.hpp>
#include <leeisd/io.hpp>
#include <leeisd/isd.hpp>
#include <leeisd/merge.hpp>
#include <leeisd/sphere.hpp>
#include <leeisd/weight.hpp>
