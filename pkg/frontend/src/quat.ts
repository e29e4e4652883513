/** Minimal xyzw quaternion helpers for integrating rotation steps. */
import type { QuatXyzw, Vec3 } from "./protocol.js";

export const IDENTITY: QuatXyzw = [0, 0, 0, 1];

export function multiply(a: QuatXyzw, b: QuatXyzw): QuatXyzw {
  const [ax, ay, az, aw] = a;
  const [bx, by, bz, bw] = b;
  return [
    aw * bx + ax * bw + ay * bz - az * by,
    aw * by - ax * bz + ay * bw + az * bx,
    aw * bz + ax * by - ay * bx + az * bw,
    aw * bw - ax * bx - ay * by - az * bz,
  ];
}

export function fromAxisAngle(axis: Vec3, angle: number): QuatXyzw {
  const n = Math.hypot(axis[0], axis[1], axis[2]);
  if (n === 0) return [...IDENTITY];
  const s = Math.sin(angle / 2) / n;
  return [axis[0] * s, axis[1] * s, axis[2] * s, Math.cos(angle / 2)];
}

export function normalize(q: QuatXyzw): QuatXyzw {
  const n = Math.hypot(q[0], q[1], q[2], q[3]);
  if (n === 0) return [...IDENTITY];
  return [q[0] / n, q[1] / n, q[2] / n, q[3] / n];
}

/** Rotate v by q. */
export function rotate(q: QuatXyzw, v: Vec3): Vec3 {
  const [x, y, z, w] = q;
  // t = 2 q_vec x v
  const tx = 2 * (y * v[2] - z * v[1]);
  const ty = 2 * (z * v[0] - x * v[2]);
  const tz = 2 * (x * v[1] - y * v[0]);
  return [
    v[0] + w * tx + y * tz - z * ty,
    v[1] + w * ty + z * tx - x * tz,
    v[2] + w * tz + x * ty - y * tx,
  ];
}
