/**
 * Turntable orbit camera: azimuth/elevation/distance around a target,
 * converted to the service's eye/target/up JSON on every commit.
 */
import type { CameraJson } from "./protocol.js";

export interface OrbitState {
  azimuth: number; // radians around +z
  elevation: number; // radians above the xy plane
  distance: number;
  target: [number, number, number];
  fovYDeg: number;
}

const MIN_ELEVATION = -Math.PI / 2 + 0.01;
const MAX_ELEVATION = Math.PI / 2 - 0.01;
const MIN_DISTANCE = 1e-3;

export function clamp(x: number, lo: number, hi: number): number {
  return Math.min(Math.max(x, lo), hi);
}

/** Orbit parameters matching a camera framing the given eye/target. */
export function orbitFromCamera(camera: CameraJson): OrbitState {
  const [ex, ey, ez] = camera.eye;
  const [tx, ty, tz] = camera.target;
  const dx = ex - tx;
  const dy = ey - ty;
  const dz = ez - tz;
  const distance = Math.hypot(dx, dy, dz);
  return {
    azimuth: Math.atan2(dy, dx),
    elevation: Math.asin(clamp(dz / Math.max(distance, MIN_DISTANCE), -1, 1)),
    distance,
    target: [tx, ty, tz],
    fovYDeg: camera.fov_y_deg,
  };
}

export function cameraFromOrbit(orbit: OrbitState): CameraJson {
  const ce = Math.cos(orbit.elevation);
  const eye: [number, number, number] = [
    orbit.target[0] + orbit.distance * ce * Math.cos(orbit.azimuth),
    orbit.target[1] + orbit.distance * ce * Math.sin(orbit.azimuth),
    orbit.target[2] + orbit.distance * Math.sin(orbit.elevation),
  ];
  // near/far track the orbit distance so zooming never clips the mesh
  return {
    eye,
    target: [...orbit.target],
    up: [0, 0, 1],
    fov_y_deg: orbit.fovYDeg,
    near: Math.max(orbit.distance / 100, 1e-4),
    far: orbit.distance * 10,
  };
}

/** Pointer drag in pixels -> new orbit angles (turntable). */
export function rotate(orbit: OrbitState, dxPx: number, dyPx: number): OrbitState {
  const RADIANS_PER_PIXEL = 0.008;
  return {
    ...orbit,
    azimuth: orbit.azimuth - dxPx * RADIANS_PER_PIXEL,
    elevation: clamp(
      orbit.elevation + dyPx * RADIANS_PER_PIXEL,
      MIN_ELEVATION,
      MAX_ELEVATION,
    ),
  };
}

/** Wheel zoom: each tick scales the distance by 10%. */
export function zoom(orbit: OrbitState, ticks: number): OrbitState {
  return {
    ...orbit,
    distance: Math.max(orbit.distance * Math.pow(1.1, ticks), MIN_DISTANCE),
  };
}
