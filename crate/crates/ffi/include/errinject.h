/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef ERRINJECT_H
#define ERRINJECT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define EI_OK 0

#define EI_NULL_POINTER 1

#define EI_INVALID_ARGUMENT 2

#define EI_JOINT_OUT_OF_LIMITS 3

#define EI_IK_NO_CONVERGENCE 4

#define EI_TOO_FEW_OBSERVATIONS 5

#define EI_DEGENERATE_MOTION 6

#define EI_WIDTH_MISMATCH 7

#define EI_IO 8

#define EI_PARSE 9

#define EI_INVALID_POSE 10

#define EI_PANIC 11

#define EI_OTHER 12

// Opaque DH table.
typedef struct EiDhTable EiDhTable;

// Opaque three-stage injector with its own copies of both networks.
typedef struct EiInjector EiInjector;

// Opaque trained network.
typedef struct EiModel EiModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`). Returns the length needed including the terminator.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t ei_last_error_message(char *buf, size_t len);

// The built-in six-joint table. Free with [`ei_dh_free`].
struct EiDhTable *ei_dh_default(void);

// # Safety
// `dh` must be null or a pointer returned by this library, freed once.
void ei_dh_free(struct EiDhTable *dh);

// Gripper pose for joints `q[6]` into `out_pose[16]`.
//
// # Safety
// Pointers must be valid for the stated lengths.
int ei_forward_kinematics(const struct EiDhTable *dh, const double *q, double *out_pose);

// Joints reaching `target_pose[16]`, searched from `seed[6]`.
//
// # Safety
// Pointers must be valid for the stated lengths.
int ei_inverse_kinematics(const struct EiDhTable *dh,
                          const double *target_pose,
                          const double *seed,
                          double *out_q);

// Euclidean distance between the translations of two poses, meters.
//
// # Safety
// Pointers must be valid for the stated lengths.
int ei_translation_error(const double *a, const double *b, double *out);

// Angle of the relative rotation between two poses, radians.
//
// # Safety
// Pointers must be valid for the stated lengths.
int ei_rotation_error(const double *a, const double *b, double *out);

// Hand-eye calibration from `n` pose pairs. `robot_gripper` and
// `tracker_marker` hold `16 * n` doubles each. Writes the gripper-to-marker
// and tracker-to-robot transforms.
//
// # Safety
// Pointers must be valid for the stated lengths.
int ei_solve_hand_eye(const double *robot_gripper,
                      const double *tracker_marker,
                      size_t n,
                      double *out_gripper_marker,
                      double *out_tracker_robot);

// Loads a model JSON file written by the CLI. Free with [`ei_model_free`].
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be valid.
int ei_model_load(const char *path, struct EiModel **out);

// # Safety
// `model` must be null or a pointer returned by this library, freed once.
void ei_model_free(struct EiModel *model);

// Number of input features, or 0 for a null model.
//
// # Safety
// `model` must be null or valid.
size_t ei_model_input_width(const struct EiModel *model);

// Joint offsets for `n` input features into `out[6]`.
//
// # Safety
// Pointers must be valid for the stated lengths.
int ei_model_predict(const struct EiModel *model, const double *features, size_t n, double *out);

// Creates an injector from a controller network, a mechanism network and a
// table. The inputs are copied and may be freed afterwards.
//
// # Safety
// Pointers must be valid.
int ei_injector_new(const struct EiModel *nn1,
                    const struct EiModel *nn2,
                    const struct EiDhTable *dh,
                    struct EiInjector **out);

// Injects errors into one setpoint. Writes the commanded joints, the
// resulting pose and whether the command was clamped to the limits. Any
// out-pointer may be null.
//
// # Safety
// Pointers must be null or valid for the stated lengths.
int ei_injector_step(struct EiInjector *injector,
                     const double *setpoint,
                     double *out_q,
                     double *out_pose,
                     int *out_clamped);

// Forgets the previous step.
//
// # Safety
// `injector` must be null or valid.
void ei_injector_reset(struct EiInjector *injector);

// # Safety
// `injector` must be null or a pointer returned by this library, freed once.
void ei_injector_free(struct EiInjector *injector);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ERRINJECT_H */
