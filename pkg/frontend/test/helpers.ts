import { Action, AppState, initialState, reducer } from "../src/state.js";
import { AuctionSummary, StreamEvent } from "../src/types.js";

export function makeAuction(overrides: Partial<AuctionSummary> = {}): AuctionSummary {
  return {
    id: "a-1",
    item_name: "Walnut desk",
    category: "furniture",
    seller: "dana",
    state: "open",
    start_price: 50,
    increment: 5,
    open_time: 10000,
    close_time: 13600,
    current_bid: null,
    current_bidder: null,
    num_bids: 0,
    required_minimum: 50,
    winner: null,
    winning_amount: null,
    ...overrides,
  };
}

let counter = 0;

export function evt(kind: string, payload: Record<string, unknown>, sequence?: number): StreamEvent {
  counter += 1;
  return { sequence: sequence ?? counter, time: 10000, kind, payload };
}

export function resetSequences(): void {
  counter = 0;
}

export function run(actions: Action[], start: AppState = initialState()): AppState {
  return actions.reduce(reducer, start);
}

export function signedIn(name = "alice"): AppState {
  return run([
    { type: "session", name, token: "tok" },
    { type: "snapshot", auctions: [makeAuction()] },
  ]);
}
