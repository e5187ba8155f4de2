/** Server-anchored clock and the countdown formatter.
 *
 * The client never free-runs: it measures the offset between the
 * server clock and its own once at connect, then derives "now" from
 * that offset. Countdown text depends only on (close_time, now), so an
 * EXTENDED event that moves close_time shows up on the very next
 * render tick.
 */

export const FINAL_MINUTE = 60;

/** Offset (seconds) to add to local time to get server time. */
export function computeOffset(serverNowSeconds: number, localMillis: number): number {
  return serverNowSeconds - Math.floor(localMillis / 1000);
}

export function serverNow(offset: number, localMillis: number): number {
  return Math.floor(localMillis / 1000) + offset;
}

export interface Countdown {
  text: string;
  finalMinute: boolean;
  closed: boolean;
}

const pad = (n: number) => String(n).padStart(2, "0");

/** "H:MM:SS" remaining, "CLOSED" at or past close. */
export function renderCountdown(closeTime: number, now: number): Countdown {
  const remaining = closeTime - now;
  if (remaining <= 0) {
    return { text: "CLOSED", finalMinute: false, closed: true };
  }
  const hours = Math.floor(remaining / 3600);
  const minutes = Math.floor((remaining % 3600) / 60);
  const seconds = remaining % 60;
  return {
    text: `${hours}:${pad(minutes)}:${pad(seconds)}`,
    finalMinute: remaining <= FINAL_MINUTE,
    closed: false,
  };
}
