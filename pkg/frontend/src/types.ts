/** Wire shapes returned by the gateway; field names match its JSON. */

export interface AuctionSummary {
  id: string;
  item_name: string;
  category: string;
  seller: string;
  state: "open" | "closed";
  start_price: number;
  increment: number;
  open_time: number;
  close_time: number;
  current_bid: number | null;
  current_bidder: string | null;
  num_bids: number;
  required_minimum: number;
  winner: string | null;
  winning_amount: number | null;
}

export interface AutobidView {
  autobid_id: string;
  auction_id: string;
  owner: string;
  max_amount: number;
  status: "active" | "at-max" | "cancelled";
}

export interface AdviceView {
  auction_id: string;
  item_name: string;
  recommended_bid: number;
  recommended_bid_time: number;
  should_bid: boolean;
  sample_size: number;
}

export interface StatsView {
  item_name: string;
  min: number;
  median: number;
  max: number;
  quantity_sold: number;
  sample_size: number;
}

export interface PredictionView {
  item_name: string;
  past: number;
  present: number;
  variant1: number;
  variant2: number;
  future: number;
  seed: number;
}

export interface StreamEvent {
  sequence: number;
  time: number;
  kind: string;
  payload: Record<string, unknown>;
}

export interface ApiError {
  error: string;
  detail: string;
  required_minimum?: number;
  sample_size?: number;
}
