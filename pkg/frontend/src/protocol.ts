/** Wire types for the ropetwin live service, one JSON object per message.
 *
 * Schemas mirror the server's validation so a message that passes here is
 * accepted there. `open` is clamped server-side but the client still emits
 * values inside [0, 1].
 */
import { z } from "zod";

const finite = z.number().finite();
export const vec3 = z.tuple([finite, finite, finite]);
export const quatXyzw = z.tuple([finite, finite, finite, finite]);

export type Vec3 = z.infer<typeof vec3>;
export type QuatXyzw = z.infer<typeof quatXyzw>;

export const armName = z.enum(["left", "right"]);
export type ArmName = z.infer<typeof armName>;

// ---- client -> server ----

export const cmdMessage = z
  .object({
    type: z.literal("cmd"),
    arm: armName,
    pos: vec3,
    quat: quatXyzw,
    open: finite.min(0).max(1),
  })
  .strict();

export const recordStartMessage = z
  .object({ type: z.literal("record_start"), rope_id: z.string().min(1) })
  .strict();

export const recordStopMessage = z
  .object({ type: z.literal("record_stop") })
  .strict();

export const resetMessage = z
  .object({
    type: z.literal("reset"),
    preset: z.string().optional(),
    centerline: z.array(vec3).min(2).optional(),
  })
  .strict();

export const snapshotMessage = z.object({ type: z.literal("snapshot") }).strict();

export const clientMessage = z.discriminatedUnion("type", [
  cmdMessage,
  recordStartMessage,
  recordStopMessage,
  resetMessage,
  snapshotMessage,
]);

export type CmdMessage = z.infer<typeof cmdMessage>;
export type ClientMessage = z.infer<typeof clientMessage>;

// ---- server -> client ----

const gripperPose = z.object({ pos: vec3, quat: quatXyzw, open: finite });
export type GripperPose = z.infer<typeof gripperPose>;

export const stateMessage = z.object({
  type: z.literal("state"),
  t: finite,
  particles: z.array(vec3),
  grippers: z.object({ left: gripperPose, right: gripperPose }),
  crossings: z.number().int().nonnegative(),
});

export const ackMessage = z.object({
  type: z.literal("ack"),
  of: z.enum(["snapshot", "reset"]),
  particles: z.array(vec3).optional(),
});

export const recordingMessage = z.object({
  type: z.literal("recording"),
  active: z.boolean(),
  frames: z.number().int().nonnegative(),
  rope_id: z.string().optional(),
  path: z.string().optional(),
});

export const errorMessage = z.object({
  type: z.literal("error"),
  code: z.string(),
  message: z.string(),
});

export const serverMessage = z.discriminatedUnion("type", [
  stateMessage,
  ackMessage,
  recordingMessage,
  errorMessage,
]);

export type StateMessage = z.infer<typeof stateMessage>;
export type RecordingMessage = z.infer<typeof recordingMessage>;
export type ServerMessage = z.infer<typeof serverMessage>;

export function parseServerMessage(text: string): ServerMessage | null {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    return null;
  }
  const res = serverMessage.safeParse(raw);
  return res.success ? res.data : null;
}

export function encodeClientMessage(msg: ClientMessage): string {
  clientMessage.parse(msg); // refuse to put an invalid message on the wire
  return JSON.stringify(msg);
}
