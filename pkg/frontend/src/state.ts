/** Single reducer for the whole console.
 *
 * State is a pure function of the initial fetch, the ordered event
 * stream, and local form results; the reducer never reads clocks or
 * the network, so replaying the same action sequence reproduces the
 * same state (and therefore the same rendered page).
 */

import {
  AdviceView,
  AuctionSummary,
  AutobidView,
  PredictionView,
  StatsView,
  StreamEvent,
} from "./types.js";

export interface Banner {
  tone: "error" | "info" | "success";
  text: string;
  retry: boolean;
}

export interface AdvicePanel {
  loading: boolean;
  view: AdviceView | null;
  refusal: string | null;
}

export interface ReportsPanel {
  item: string;
  stats: StatsView | null;
  prediction: PredictionView | null;
  empty: string | null;
}

export interface AppState {
  session: { name: string; token: string } | null;
  auctions: Record<string, AuctionSummary>;
  order: string[];
  extended: Record<string, boolean>;
  selected: string | null;
  autobids: Record<string, AutobidView>;
  banner: Banner | null;
  prefill: Record<string, number>;
  atMaxPrompt: string | null;
  advice: AdvicePanel;
  reports: ReportsPanel;
  lastSequence: number;
}

export function initialState(): AppState {
  return {
    session: null,
    auctions: {},
    order: [],
    extended: {},
    selected: null,
    autobids: {},
    banner: null,
    prefill: {},
    atMaxPrompt: null,
    advice: { loading: false, view: null, refusal: null },
    reports: { item: "", stats: null, prediction: null, empty: null },
    lastSequence: 0,
  };
}

export type Action =
  | { type: "session"; name: string; token: string }
  | { type: "snapshot"; auctions: AuctionSummary[] }
  | { type: "autobids"; autobids: AutobidView[] }
  | { type: "select"; auctionId: string | null }
  | { type: "stream"; event: StreamEvent }
  | { type: "bid-accepted"; auction: AuctionSummary }
  | { type: "bid-rejected"; auctionId: string; detail: string; requiredMinimum: number | null }
  | { type: "autobid-saved"; autobid: AutobidView }
  | { type: "action-failed"; detail: string }
  | { type: "network-error"; detail: string }
  | { type: "advice-loading" }
  | { type: "advice"; view: AdviceView }
  | { type: "advice-refused"; reason: string }
  | { type: "reports"; item: string; stats: StatsView | null; prediction: PredictionView | null; empty: string | null }
  | { type: "dismiss-banner" }
  | { type: "dismiss-at-max" };

function upsertAuction(state: AppState, auction: AuctionSummary): AppState {
  const known = auction.id in state.auctions;
  return {
    ...state,
    auctions: { ...state.auctions, [auction.id]: auction },
    order: known ? state.order : [...state.order, auction.id],
  };
}

function patchAuction(
  state: AppState, id: string, patch: Partial<AuctionSummary>,
): AppState {
  const existing = state.auctions[id];
  if (!existing) return state;
  return {
    ...state,
    auctions: { ...state.auctions, [id]: { ...existing, ...patch } },
  };
}

function applyStream(state: AppState, event: StreamEvent): AppState {
  if (event.sequence <= state.lastSequence) return state; // replayed frame
  const p = event.payload as Record<string, any>;
  let next: AppState = { ...state, lastSequence: event.sequence };
  switch (event.kind) {
    case "AUCTION_OPENED":
      next = upsertAuction(next, {
        id: p.auction_id,
        item_name: p.item_name,
        category: p.category ?? "",
        seller: p.seller ?? "",
        state: "open",
        start_price: p.start_price,
        increment: p.increment,
        open_time: p.open_time,
        close_time: p.close_time,
        current_bid: null,
        current_bidder: null,
        num_bids: 0,
        required_minimum: p.start_price,
        winner: null,
        winning_amount: null,
      });
      break;
    case "BID_ACCEPTED":
      next = patchAuction(next, p.auction_id, {
        current_bid: p.amount,
        current_bidder: p.bidder,
        num_bids: p.num_bids,
        required_minimum:
          p.amount + (state.auctions[p.auction_id]?.increment ?? 0),
      });
      break;
    case "EXTENDED":
      next = patchAuction(next, p.auction_id, { close_time: p.new_close_time });
      next.extended = { ...next.extended, [p.auction_id]: true };
      break;
    case "CLOSED":
      next = patchAuction(next, p.auction_id, {
        state: "closed",
        winner: p.winner,
        winning_amount: p.amount,
        close_time: p.closed_at,
      });
      break;
    case "AUTOBID_CREATED": {
      const autobid: AutobidView = {
        autobid_id: p.autobid_id,
        auction_id: p.auction_id,
        owner: p.owner,
        max_amount: p.max_amount,
        status: p.status,
      };
      next = { ...next, autobids: { ...next.autobids, [autobid.autobid_id]: autobid } };
      // a raise reactivates: stop prompting for this autobid
      if (next.atMaxPrompt === autobid.autobid_id && autobid.status === "active") {
        next.atMaxPrompt = null;
      }
      break;
    }
    case "AUTOBID_AT_MAX": {
      const entry = next.autobids[p.autobid_id];
      if (entry) {
        next = {
          ...next,
          autobids: {
            ...next.autobids,
            [p.autobid_id]: { ...entry, status: "at-max" },
          },
        };
      }
      if (state.session && p.owner === state.session.name) {
        next.atMaxPrompt = p.autobid_id;
      }
      break;
    }
    case "AUTOBID_CANCELLED": {
      const entry = next.autobids[p.autobid_id];
      if (entry) {
        next = {
          ...next,
          autobids: {
            ...next.autobids,
            [p.autobid_id]: { ...entry, status: "cancelled" },
          },
        };
      }
      if (next.atMaxPrompt === p.autobid_id) next.atMaxPrompt = null;
      break;
    }
    default:
      break; // BID_REJECTED, ADVICE_SERVED, RECORD_ADDED need no view change
  }
  return next;
}

export function reducer(state: AppState, action: Action): AppState {
  switch (action.type) {
    case "session":
      return { ...state, session: { name: action.name, token: action.token } };
    case "snapshot": {
      let next = state;
      for (const auction of action.auctions) next = upsertAuction(next, auction);
      return next;
    }
    case "autobids": {
      const autobids = { ...state.autobids };
      for (const autobid of action.autobids) autobids[autobid.autobid_id] = autobid;
      return { ...state, autobids };
    }
    case "select":
      return {
        ...state,
        selected: action.auctionId,
        advice: { loading: false, view: null, refusal: null },
        banner: null,
      };
    case "stream":
      return applyStream(state, action.event);
    case "bid-accepted":
      return {
        ...upsertAuction(state, action.auction),
        banner: {
          tone: "success",
          text: `bid of ${action.auction.current_bid} accepted`,
          retry: false,
        },
      };
    case "bid-rejected": {
      const prefill =
        action.requiredMinimum !== null
          ? { ...state.prefill, [action.auctionId]: action.requiredMinimum }
          : state.prefill;
      const text =
        action.requiredMinimum !== null
          ? `bid rejected: minimum ${action.requiredMinimum}`
          : `bid rejected: ${action.detail}`;
      return { ...state, prefill, banner: { tone: "error", text, retry: false } };
    }
    case "autobid-saved":
      return {
        ...state,
        autobids: { ...state.autobids, [action.autobid.autobid_id]: action.autobid },
        atMaxPrompt:
          state.atMaxPrompt === action.autobid.autobid_id && action.autobid.status !== "at-max"
            ? null
            : state.atMaxPrompt,
      };
    case "action-failed":
      return { ...state, banner: { tone: "error", text: action.detail, retry: false } };
    case "network-error":
      return {
        ...state,
        banner: { tone: "error", text: `network failure: ${action.detail}`, retry: true },
      };
    case "advice-loading":
      return { ...state, advice: { loading: true, view: null, refusal: null } };
    case "advice":
      return { ...state, advice: { loading: false, view: action.view, refusal: null } };
    case "advice-refused":
      return { ...state, advice: { loading: false, view: null, refusal: action.reason } };
    case "reports":
      return {
        ...state,
        reports: {
          item: action.item,
          stats: action.stats,
          prediction: action.prediction,
          empty: action.empty,
        },
      };
    case "dismiss-banner":
      return { ...state, banner: null };
    case "dismiss-at-max":
      return { ...state, atMaxPrompt: null };
    default:
      return state;
  }
}

/** Client-side check for the auto-bid form; the server re-checks. */
export function validateMax(auction: AuctionSummary, maxAmount: number): string | null {
  if (!Number.isInteger(maxAmount) || maxAmount <= 0) {
    return "maximum must be a positive whole amount";
  }
  if (maxAmount < auction.required_minimum) {
    return `maximum must reach the required minimum ${auction.required_minimum}`;
  }
  return null;
}

/** Autobids belonging to the signed-in participant, stable order. */
export function myAutobids(state: AppState): AutobidView[] {
  const me = state.session?.name;
  return Object.values(state.autobids)
    .filter((a) => a.owner === me)
    .sort((a, b) => a.autobid_id.localeCompare(b.autobid_id, undefined, { numeric: true }));
}
