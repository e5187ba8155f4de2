/** Event-stream subscription.
 *
 * Wraps EventSource so the rest of the app only sees parsed frames and
 * connection state changes. Resume is native: the browser re-sends
 * Last-Event-ID, and the gateway replays from there.
 */

import { StreamEvent } from "./types.js";

export interface StreamHandlers {
  onEvent: (event: StreamEvent) => void;
  onDown: (detail: string) => void;
  onUp: () => void;
}

const KINDS = [
  "AUCTION_OPENED",
  "BID_ACCEPTED",
  "BID_REJECTED",
  "EXTENDED",
  "CLOSED",
  "AUTOBID_CREATED",
  "AUTOBID_AT_MAX",
  "AUTOBID_CANCELLED",
  "ADVICE_SERVED",
  "RECORD_ADDED",
];

export function openStream(base: string, since: number, handlers: StreamHandlers): EventSource {
  const source = new EventSource(`${base}/events?since=${since}`);
  const deliver = (message: MessageEvent) => {
    // data is the whole event envelope: {sequence, time, kind, payload}
    handlers.onEvent(JSON.parse(message.data as string) as StreamEvent);
  };
  for (const kind of KINDS) {
    source.addEventListener(kind, (message) => deliver(message as MessageEvent));
  }
  source.onopen = () => handlers.onUp();
  source.onerror = () => handlers.onDown("event stream disconnected");
  return source;
}
