/** Live-loop acceptance: drive a real `ropetwin serve` through the UI
 * session layer with scripted input, record ~2 s, then hand the demo file
 * to the headless replayer and compare its final state with the last state
 * the service broadcast while recording.
 *
 * Needs the python package installed (`pip install -e .` in the repo root);
 * the server is spawned as a child process on a random port.
 */
import { spawn, execFile, type ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import WebSocket from "ws";

import type { RecordingMessage, StateMessage, Vec3 } from "../src/protocol.js";
import { parseServerMessage } from "../src/protocol.js";
import { Session } from "../src/session.js";
import type { SocketLike } from "../src/session.js";

const PORT = 18000 + Math.floor(Math.random() * 10000);
const URL_WS = `ws://127.0.0.1:${PORT}/ws`;
const TICK_MS = 1000 / 30;

let server: ChildProcess | null = null;
let recordDir = "";

function waitFor(cond: () => boolean, ms: number, what: string): Promise<void> {
  const t0 = Date.now();
  return new Promise((resolve, reject) => {
    const poll = setInterval(() => {
      if (cond()) {
        clearInterval(poll);
        resolve();
      } else if (Date.now() - t0 > ms) {
        clearInterval(poll);
        reject(new Error(`timeout waiting for ${what}`));
      }
    }, 10);
  });
}

function sleepUntil(deadline: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, Math.max(0, deadline - Date.now())));
}

function pythonCheck(
  demoPath: string,
  snapshotPath: string,
  livePath: string,
): Promise<{ frames: number; mean_dist: number }> {
  const code = [
    "import json, sys",
    "import numpy as np",
    "from ropetwin.playback import load_demonstration, replay",
    "from ropetwin.shell import load_state",
    "from ropetwin.rodsim import RodMaterial, SimConfig",
    "demo = load_demonstration(sys.argv[1])",
    "init = load_state(sys.argv[2])",
    "live = np.array(json.load(open(sys.argv[3])))",
    "traj = replay(demo, init, RodMaterial(), SimConfig())",
    "d = float(np.linalg.norm(traj.states[-1] - live, axis=1).mean())",
    "print(json.dumps({'frames': demo.frame_count, 'mean_dist': d}))",
  ].join("\n");
  return new Promise((resolve, reject) => {
    execFile(
      "python3",
      ["-c", code, demoPath, snapshotPath, livePath],
      { timeout: 120_000 },
      (err, stdout, stderr) => {
        if (err) reject(new Error(`replay check failed: ${stderr || err.message}`));
        else resolve(JSON.parse(stdout.trim()));
      },
    );
  });
}

beforeAll(async () => {
  recordDir = mkdtempSync(join(tmpdir(), "teleop-live-"));
  server = spawn(
    "python3",
    [
      "-m",
      "ropetwin.cli",
      "serve",
      "--port",
      String(PORT),
      "--host",
      "127.0.0.1",
      "--preset",
      "straight",
      "--record-dir",
      recordDir,
    ],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  server.stderr?.on("data", () => {}); // uvicorn logs, keep the pipe drained
  server.stdout?.on("data", () => {});
  let healthy = false;
  for (let i = 0; i < 150 && !healthy; i++) {
    try {
      const res = await fetch(`http://127.0.0.1:${PORT}/healthz`);
      healthy = res.ok;
    } catch {
      await new Promise((r) => setTimeout(r, 100));
    }
  }
  if (!healthy) throw new Error("serve did not come up");
}, 30_000);

afterAll(() => {
  server?.kill("SIGTERM");
});

describe("live teleoperation loop", () => {
  it(
    "scripted 2 s recording replays onto the live final state",
    async () => {
      // monitor connection: captures every broadcast, asks for the snapshot
      const monitor = new WebSocket(URL_WS);
      const states: StateMessage[] = [];
      const recordings: RecordingMessage[] = [];
      let snapshot: Vec3[] | null = null;
      let lastStateBeforeStop: StateMessage | null = null;
      monitor.on("message", (data: Buffer) => {
        const msg = parseServerMessage(data.toString());
        if (msg === null) return;
        if (msg.type === "state") states.push(msg);
        if (msg.type === "ack" && msg.of === "snapshot" && msg.particles) {
          snapshot = msg.particles;
        }
        if (msg.type === "recording") {
          recordings.push(msg);
          if (!msg.active) lastStateBeforeStop = states[states.length - 1] ?? null;
        }
      });
      await new Promise<void>((resolve) => monitor.on("open", () => resolve()));

      // the UI under test, driven by synthetic key events
      const session = new Session(URL_WS, {
        socketFactory: (u) => new WebSocket(u) as unknown as SocketLike,
      });
      await waitFor(
        () => session.vm.connection === "connected" && session.vm.latest !== null,
        10_000,
        "session connected",
      );

      // approach: burst of key ticks walks the target from the park pose to
      // just above the rope (commands collapse server-side, rope untouched)
      for (let i = 0; i < 110; i++) session.dispatch({ kind: "key", code: "KeyD" });
      for (let i = 0; i < 96; i++) session.dispatch({ kind: "key", code: "KeyQ" });
      const left = session.vm.targets.left;
      expect(left).not.toBeNull();
      expect(left!.pos[0]).toBeCloseTo(0.1, 9);
      expect(left!.pos[2]).toBeCloseTo(0.04, 9);
      await new Promise((r) => setTimeout(r, 200)); // let the tick apply it

      monitor.send(JSON.stringify({ type: "snapshot" }));
      await waitFor(() => snapshot !== null, 5_000, "snapshot ack");

      // scripted recording: lower, grasp, lift, drag, settle; absolute-time
      // schedule keeps the whole window at 2.0 s regardless of event jitter
      const t0 = Date.now();
      session.dispatch({ kind: "record-start", ropeId: "tsrope" });
      const script: Array<{ at: number; code: string }> = [];
      let tick = 0;
      const push = (code: string, repeat = 1) => {
        for (let i = 0; i < repeat; i++) {
          script.push({ at: 60 + tick * TICK_MS, code });
          tick += 1;
        }
      };
      push("KeyQ", 3); // z 0.04 -> 0.01, particle within grasp range
      push("KeyG"); // close
      push("KeyE", 10); // lift to 0.11
      push("KeyW", 10); // +y
      push("KeyD", 10); // +x
      push("KeyK", 3); // a little wrist pitch
      for (const step of script) {
        await sleepUntil(t0 + step.at);
        session.dispatch({ kind: "key", code: step.code });
      }
      await sleepUntil(t0 + 2000);
      session.dispatch({ kind: "record-stop" });
      await waitFor(
        () => recordings.some((r) => !r.active),
        5_000,
        "recording to finish",
      );

      const done = recordings.find((r) => !r.active);
      expect(done).toBeDefined();
      const frames = done!.frames;
      const path = done!.path;
      expect(path).toBeDefined();
      expect(frames).toBeGreaterThanOrEqual(58);
      expect(frames).toBeLessThanOrEqual(62);

      // session saw the same recording lifecycle through its own socket
      expect(session.vm.recording.active).toBe(false);
      expect(session.vm.lastRecordingPath).toBe(path);
      expect(session.vm.framesSeen).toBeGreaterThan(30); // ~30 Hz for > 2 s

      expect(lastStateBeforeStop).not.toBeNull();
      const livePts = (lastStateBeforeStop as unknown as StateMessage).particles;
      const snapshotPath = join(recordDir, "snapshot.json");
      writeFileSync(
        snapshotPath,
        JSON.stringify({ format: "state-v1", points: snapshot }) + "\n",
      );
      const livePath = join(recordDir, "live_final.json");
      writeFileSync(livePath, JSON.stringify(livePts) + "\n");

      const check = await pythonCheck(path!, snapshotPath, livePath);
      expect(check.frames).toBe(frames);
      expect(check.mean_dist).toBeLessThan(0.005);

      session.close();
      monitor.close();
    },
    120_000,
  );
});
