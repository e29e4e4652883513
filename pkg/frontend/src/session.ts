/** Socket lifecycle around the reducer: connect, dispatch, reconnect.
 *
 * Everything stateful lives here so the reducer stays pure. The WebSocket
 * constructor is injectable (browser native in main.ts, the `ws` package
 * in node tests). All socket callbacks funnel into dispatch() on whatever
 * thread/loop the host gives us; there is exactly one mutable `vm`.
 */
import { encodeClientMessage, parseServerMessage } from "./protocol.js";
import type { ClientMessage } from "./protocol.js";
import {
  initViewModel,
  reduce,
  type ControlSteps,
  type UiEvent,
  type ViewModel,
} from "./viewmodel.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  addEventListener(type: "open" | "close" | "error", listener: () => void): void;
  addEventListener(
    type: "message",
    listener: (ev: { data: unknown }) => void,
  ): void;
  readyState: number;
}

export type SocketFactory = (url: string) => SocketLike;

const OPEN = 1; // WebSocket.OPEN

export interface SessionOptions {
  socketFactory?: SocketFactory;
  onChange?: (vm: ViewModel) => void;
  /** Reconnect delays in ms; the last entry repeats. */
  backoff?: number[];
  steps?: Partial<ControlSteps>;
}

export class Session {
  vm: ViewModel;
  private readonly url: string;
  private readonly factory: SocketFactory;
  private readonly onChange: (vm: ViewModel) => void;
  private readonly backoff: number[];
  private socket: SocketLike | null = null;
  private attempt = 0;
  private stopped = false;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(url: string, opts: SessionOptions = {}) {
    this.url = url;
    this.factory =
      opts.socketFactory ??
      ((u: string) => new (globalThis as { WebSocket: new (u: string) => SocketLike }).WebSocket(u));
    this.onChange = opts.onChange ?? (() => {});
    this.backoff = opts.backoff ?? [250, 500, 1000, 2000, 4000];
    this.vm = initViewModel(opts.steps);
    this.open();
  }

  dispatch(event: UiEvent): void {
    const step = reduce(this.vm, event);
    this.vm = step.vm;
    for (const msg of step.send) this.transmit(msg);
    this.onChange(this.vm);
  }

  /** Send a message that bypasses the reducer (snapshot, reset). */
  transmit(msg: ClientMessage): void {
    if (this.socket !== null && this.socket.readyState === OPEN) {
      this.socket.send(encodeClientMessage(msg));
    }
  }

  close(): void {
    this.stopped = true;
    if (this.timer !== null) clearTimeout(this.timer);
    this.socket?.close();
  }

  private open(): void {
    if (this.stopped) return;
    const sock = this.factory(this.url);
    this.socket = sock;
    sock.addEventListener("open", () => {
      this.attempt = 0;
      this.dispatch({ kind: "socket-open" });
    });
    sock.addEventListener("message", (ev: { data: unknown }) => {
      const msg = parseServerMessage(String(ev.data));
      if (msg !== null) this.dispatch({ kind: "server", msg });
    });
    const onDown = () => {
      if (this.socket !== sock) return; // stale socket's close event
      this.socket = null;
      this.dispatch({ kind: "socket-close" });
      this.scheduleReconnect();
    };
    sock.addEventListener("close", onDown);
    sock.addEventListener("error", () => {
      // close always follows error for both browser and ws sockets; the
      // handler only needs to exist so node does not crash on 'error'
    });
  }

  private scheduleReconnect(): void {
    if (this.stopped || this.timer !== null) return;
    const delay = this.backoff[Math.min(this.attempt, this.backoff.length - 1)] ?? 1000;
    this.attempt += 1;
    this.timer = setTimeout(() => {
      this.timer = null;
      this.open();
    }, delay);
  }
}
